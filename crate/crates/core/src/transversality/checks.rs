//! Finite-depth checks of the four convolution criteria on sampled pairs.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::orbit::{multipliers, phi_and_derivative};
use crate::dimension::BernoulliWeights;
use crate::error::{Error, Result};
use crate::ifs::CantorFamily;
use crate::symbolic::{cylinder_enumerate, SymbolPath, Word, DEFAULT_CYLINDER_CAP};

/// Relative slack on the cylinder-mass comparison.
const SMB_SLACK: f64 = 1e-12;
/// Pair profiles whose fitted normalized minimum drops by more than this factor across the
/// wedge range count as decaying.
pub const DECAY_FACTOR: f64 = 0.1;
/// Fitted per-level growth of `ln C1` above which the diameter bound counts as failing.
pub const GROWTH_TOL: f64 = 0.02;
pub const V_GRID: usize = 33;
/// Random symbols drawn past the first difference before the periodic tail starts, so that
/// sampled points are generic rather than gap endpoints.
const FREE_SYMBOLS: usize = 24;
const TAIL_LEN: usize = 8;
const RESAMPLE_ATTEMPTS: usize = 64;

/// Depth-`n` Birkhoff averages `-(1/n) Σ ln|l^(s)|` along `u^∞`, for every word and grid point.
fn birkhoff_averages(fam: &CantorFamily, grid: &[f64], word: &Word) -> Vec<f64> {
    let n = word.len() as f64;
    if fam.is_affine() {
        return grid
            .iter()
            .map(|&l| {
                -word
                    .symbols()
                    .iter()
                    .map(|&s| fam.maps[s as usize].c.value(l).abs().ln())
                    .sum::<f64>()
                    / n
            })
            .collect();
    }
    let path = SymbolPath::periodic_word(word).expect("nonempty word");
    grid.iter()
        .map(|&l| {
            let ls = multipliers(fam, l, &path, word.len()).expect("matching alphabet");
            -ls.iter().map(|x| x.abs().ln()).sum::<f64>() / n
        })
        .collect()
}

/// True for each word whose Birkhoff average lies in `(α ln m, β ln m)` at every grid point.
pub fn birkhoff_window_check(fam: &CantorFamily, grid: &[f64], words: &[Word], alpha: f64, beta: f64) -> Vec<bool> {
    let lnm = (fam.alphabet() as f64).ln();
    let (lo, hi) = (alpha * lnm, beta * lnm);
    words
        .par_iter()
        .map(|u| !u.is_empty() && birkhoff_averages(fam, grid, u).iter().all(|&a| lo < a && a < hi))
        .collect()
}

/// True for each word with `μ([u]) ≤ C3·m^{-γ n}`.
pub fn smb_check(w: &BernoulliWeights, words: &[Word], gamma: f64, c3: f64) -> Vec<bool> {
    let m = w.len() as f64;
    words
        .iter()
        .map(|u| u.cylinder_mass(w.probs()) <= c3 * m.powf(-gamma * u.len() as f64) * (1.0 + SMB_SLACK))
        .collect()
}

/// Cylinders of one depth passing both the Birkhoff window and the SMB bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaEpsilonSet {
    pub depth: usize,
    #[serde(skip)]
    pub words: Vec<Word>,
    #[serde(skip)]
    pub masses: Vec<f64>,
    pub retained: usize,
    pub mass: f64,
    pub birkhoff_mass: f64,
    pub smb_mass: f64,
    pub epsilon: f64,
    pub pass: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn select_omega_epsilon(
    fam: &CantorFamily,
    w: &BernoulliWeights,
    grid: &[f64],
    n: usize,
    alpha: f64,
    beta: f64,
    gamma: f64,
    c3: f64,
    epsilon: f64,
) -> Result<OmegaEpsilonSet> {
    if w.len() != fam.alphabet() {
        return Err(Error::invalid("weights and family have different alphabet sizes"));
    }
    let words = cylinder_enumerate(fam.alphabet(), n, DEFAULT_CYLINDER_CAP)?;
    let birkhoff = birkhoff_window_check(fam, grid, &words, alpha, beta);
    let smb = smb_check(w, &words, gamma, c3);
    let (mut mass, mut birkhoff_mass, mut smb_mass) = (0.0, 0.0, 0.0);
    let mut kept = Vec::new();
    let mut masses = Vec::new();
    for ((u, b), s) in words.into_iter().zip(birkhoff).zip(smb) {
        let mu = u.cylinder_mass(w.probs());
        if b {
            birkhoff_mass += mu;
        }
        if s {
            smb_mass += mu;
        }
        if b && s {
            mass += mu;
            masses.push(mu);
            kept.push(u);
        }
    }
    Ok(OmegaEpsilonSet {
        depth: n,
        retained: kept.len(),
        words: kept,
        masses,
        mass,
        birkhoff_mass,
        smb_mass,
        epsilon,
        pass: mass > 1.0 - epsilon,
    })
}

/// Two eventually periodic sequences with a known common prefix length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePair {
    pub omega: SymbolPath,
    pub tau: SymbolPath,
    pub wedge: usize,
}

fn render(p: &SymbolPath) -> String {
    let digits = |s: &[u8]| {
        s.iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(if p.alphabet() > 10 { "." } else { "" })
    };
    format!("{}({})", digits(p.prefix()), digits(p.tail()))
}

impl SamplePair {
    pub fn describe(&self) -> (String, String) {
        (render(&self.omega), render(&self.tau))
    }
}

/// Up to `per_wedge` pairs for every wedge depth in `wedges`. Both sequences start with a
/// retained cylinder of `omega_set`; all other symbols are drawn from `w`.
pub fn sample_pairs(
    omega_set: &OmegaEpsilonSet,
    w: &BernoulliWeights,
    wedges: std::ops::RangeInclusive<usize>,
    per_wedge: usize,
    seed: u64,
) -> Result<Vec<SamplePair>> {
    let m = w.len();
    let n = omega_set.depth;
    if omega_set.words.is_empty() {
        return Ok(Vec::new());
    }
    let retained: std::collections::HashSet<&[u8]> = omega_set.words.iter().map(Word::symbols).collect();
    let pick_word = WeightedIndex::new(&omega_set.masses).map_err(|e| Error::invalid(e.to_string()))?;
    let symbols = w.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for wedge in wedges {
        for _ in 0..per_wedge {
            let base = &omega_set.words[pick_word.sample(&mut rng)];
            let mut a: Vec<u8> = base.symbols().to_vec();
            while a.len() < n.max(wedge + 1) + FREE_SYMBOLS {
                a.push(symbols.sample(&mut rng) as u8);
            }
            let tail_a: Vec<u8> = (0..TAIL_LEN).map(|_| symbols.sample(&mut rng) as u8).collect();
            let mut found = None;
            for _ in 0..RESAMPLE_ATTEMPTS {
                let mut b = a[..wedge].to_vec();
                let other = {
                    let k = rng.random_range(0..m - 1) as u8;
                    if k >= a[wedge] {
                        k + 1
                    } else {
                        k
                    }
                };
                b.push(other);
                while b.len() < a.len() {
                    b.push(symbols.sample(&mut rng) as u8);
                }
                if retained.contains(&b[..n]) {
                    found = Some(b);
                    break;
                }
            }
            let Some(b) = found else { continue };
            let tail_b: Vec<u8> = (0..TAIL_LEN).map(|_| symbols.sample(&mut rng) as u8).collect();
            pairs.push(SamplePair {
                omega: SymbolPath::new(m, a, tail_a)?,
                tau: SymbolPath::new(m, b, tail_b)?,
                wedge,
            });
        }
    }
    Ok(pairs)
}

/// `φ`, `dφ/dλ` and `Π l^(s)` of one pair over the λ-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairProfile {
    pub pair: SamplePair,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub multiplier_product: Vec<f64>,
}

impl PairProfile {
    /// `|dφ/dλ| / (n·|Π l|)` at each grid point.
    pub fn normalized(&self) -> Vec<f64> {
        let n = self.pair.wedge as f64;
        self.dphi
            .iter()
            .zip(&self.multiplier_product)
            .map(|(d, l)| d.abs() / (n * l.abs()))
            .collect()
    }
}

pub fn profile_pairs(fam: &CantorFamily, pairs: &[SamplePair], grid: &[f64]) -> Vec<PairProfile> {
    pairs
        .par_iter()
        .map(|pair| {
            let (mut phi, mut dphi, mut prod) = (Vec::new(), Vec::new(), Vec::new());
            for &l in grid {
                let (v, d) = phi_and_derivative(fam, &pair.omega, &pair.tau, pair.wedge, l);
                phi.push(v.value);
                dphi.push(d.total);
                prod.push(d.multiplier_product);
            }
            PairProfile {
                pair: pair.clone(),
                phi,
                dphi,
                multiplier_product: prod,
            }
        })
        .collect()
}

/// Least-squares slope of `ln y` against `x`; `None` with fewer than two usable points.
fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0 && p.1.is_finite())
        .map(|&(x, y)| (x, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstPair {
    pub omega: String,
    pub tau: String,
    pub wedge: usize,
    pub lambda: f64,
    pub value: f64,
}

fn worst_pair(p: &PairProfile, lambda: f64, value: f64) -> WorstPair {
    let (omega, tau) = p.pair.describe();
    WorstPair {
        omega,
        tau,
        wedge: p.pair.wedge,
        lambda,
        value,
    }
}

/// Per-wedge minima of the normalized derivative and the resulting `δ*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub delta_star: f64,
    pub delta_min: f64,
    /// `(wedge, minimum)` in increasing wedge order.
    pub per_wedge: Vec<(usize, f64)>,
    /// Fitted factor by which the minimum changes across the wedge range.
    pub trend: f64,
    pub decaying: bool,
    pub worst: Option<WorstPair>,
    pub pass: bool,
}

pub fn transversality_lower_bound(profiles: &[PairProfile], grid: &[f64], delta_min: f64) -> LowerBound {
    let mut per_wedge: std::collections::BTreeMap<usize, f64> = Default::default();
    let mut worst: Option<WorstPair> = None;
    for p in profiles.iter().filter(|p| p.pair.wedge > 0) {
        for (k, v) in p.normalized().into_iter().enumerate() {
            let v = if v.is_nan() { 0.0 } else { v };
            let e = per_wedge.entry(p.pair.wedge).or_insert(f64::INFINITY);
            *e = e.min(v);
            if worst.as_ref().is_none_or(|w| v < w.value) {
                worst = Some(worst_pair(p, grid[k], v));
            }
        }
    }
    let per_wedge: Vec<(usize, f64)> = per_wedge.into_iter().collect();
    let delta_star = if per_wedge.is_empty() {
        0.0
    } else {
        per_wedge.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    };
    let trend = match (per_wedge.first(), per_wedge.last()) {
        (Some(a), Some(b)) if delta_star > 0.0 => {
            let pts: Vec<(f64, f64)> = per_wedge.iter().map(|&(n, v)| (n as f64, v)).collect();
            log_slope(&pts).map_or(1.0, |s| (s * (b.0 - a.0) as f64).exp())
        }
        _ => 0.0,
    };
    let decaying = trend < DECAY_FACTOR;
    LowerBound {
        delta_star,
        delta_min,
        per_wedge,
        trend,
        decaying,
        worst,
        pass: delta_star > delta_min && !decaying,
    }
}

/// `max_λ |φ| ≤ C1·m^{-α·wedge}` on every profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterBound {
    pub alpha: f64,
    pub c1: f64,
    /// Smallest constant satisfying the bound on the sample.
    pub c1_min: f64,
    pub per_wedge: Vec<(usize, f64)>,
    /// Fitted per-level slope of `ln C1` against the wedge depth.
    pub growth: f64,
    pub pass: bool,
}

pub fn diameter_check(profiles: &[PairProfile], m: usize, alpha: f64, c1: f64) -> DiameterBound {
    let mut per_wedge: std::collections::BTreeMap<usize, f64> = Default::default();
    for p in profiles {
        let sup = p.phi.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let need = sup * (m as f64).powf(alpha * p.pair.wedge as f64);
        let e = per_wedge.entry(p.pair.wedge).or_insert(0.0);
        *e = e.max(need);
    }
    let per_wedge: Vec<(usize, f64)> = per_wedge.into_iter().collect();
    let c1_min = per_wedge.iter().map(|p| p.1).fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = per_wedge.iter().map(|&(n, v)| (n as f64, v)).collect();
    let growth = log_slope(&pts).unwrap_or(0.0);
    DiameterBound {
        alpha,
        c1,
        c1_min,
        per_wedge,
        growth,
        pass: !profiles.is_empty() && c1_min <= c1 && growth <= GROWTH_TOL,
    }
}

/// Sup over `v` of `Leb{λ ∈ W : |v + φ(λ)| ≤ r}` compared with `C2·m^{wedge·β}·r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublevelBound {
    pub beta: f64,
    pub c2: f64,
    pub r_grid: Vec<f64>,
    pub grid_step: f64,
    /// Smallest constant consistent with the grid-counted measures.
    pub c2_empirical: f64,
    /// Constant implied by `|dφ/dλ| ≥ s ⇒ measure ≤ 2r/s`.
    pub c2_analytic: f64,
    pub worst: Option<WorstPair>,
    pub pass: bool,
}

/// Trapezoidal measure of `{λ : |v + φ(λ)| ≤ r}` on a uniform grid.
pub fn sublevel_measure(phi: &[f64], step: f64, v: f64, r: f64) -> f64 {
    let inside: Vec<f64> = phi.iter().map(|p| if (v + p).abs() <= r { 1.0 } else { 0.0 }).collect();
    inside.windows(2).map(|w| 0.5 * (w[0] + w[1]) * step).sum()
}

pub fn sublevel_check(
    fam: &CantorFamily,
    profiles: &[PairProfile],
    grid: &[f64],
    r_grid: &[f64],
    m: usize,
    beta: f64,
    c2: f64,
) -> Result<SublevelBound> {
    if grid.len() < 2 || r_grid.is_empty() {
        return Err(Error::invalid(
            "the sublevel bound needs a λ-grid and at least one radius",
        ));
    }
    let step = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    let r_min = r_grid.iter().copied().fold(f64::INFINITY, f64::min);
    // Defaults put the smallest radius at exactly ten steps; allow for its rounding.
    if step > r_min / 10.0 * (1.0 + 1e-9) {
        return Err(Error::GridTooCoarse { step, radius: r_min });
    }
    let mid = 0.5 * (grid[0] + grid[grid.len() - 1]);
    let rows: Vec<(f64, f64, Option<WorstPair>)> = profiles
        .par_iter()
        .map(|p| {
            let scale = (m as f64).powf(beta * p.pair.wedge as f64);
            let lo = p.phi.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = p.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let centre = phi_and_derivative(fam, &p.pair.omega, &p.pair.tau, p.pair.wedge, mid)
                .0
                .value;
            let mut vs: Vec<f64> = (0..V_GRID)
                .map(|k| -(lo + (hi - lo) * k as f64 / (V_GRID - 1) as f64))
                .collect();
            vs.push(-centre);
            let mut emp = 0.0f64;
            let mut worst = None;
            for &r in r_grid {
                for &v in &vs {
                    let need = sublevel_measure(&p.phi, step, v, r) / (scale * r);
                    if need > emp {
                        emp = need;
                        worst = Some(worst_pair(p, -v, need));
                    }
                }
            }
            let slope = p.dphi.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
            let analytic = if slope > 0.0 {
                2.0 / (slope * scale)
            } else {
                f64::INFINITY
            };
            (emp, analytic, worst)
        })
        .collect();
    let mut c2_empirical = 0.0f64;
    let mut c2_analytic = 0.0f64;
    let mut worst = None;
    for (emp, ana, w) in rows {
        if emp > c2_empirical {
            c2_empirical = emp;
            worst = w;
        }
        c2_analytic = c2_analytic.max(ana);
    }
    Ok(SublevelBound {
        beta,
        c2,
        r_grid: r_grid.to_vec(),
        grid_step: step,
        c2_empirical,
        c2_analytic,
        worst,
        // The grid only sees r >= 10 steps; the derivative bound is what covers r -> 0.
        pass: !profiles.is_empty() && c2_empirical <= c2 && c2_analytic <= c2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub amplitude: f64,
    /// `max_i ‖g_i‖_{C²}` of the scaled perturbation.
    pub c2_norm: f64,
    pub bound: LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSweep {
    pub rows: Vec<SweepRow>,
    /// Smallest swept `C²` norm at which the lower bound fails.
    pub threshold: Option<f64>,
}

/// `δ*` of `fam` with every perturbation replaced by `g` scaled by each amplitude.
pub fn perturbation_sweep(
    fam: &CantorFamily,
    g: &crate::ifs::Perturbation,
    amplitudes: &[f64],
    pairs: &[SamplePair],
    grid: &[f64],
    delta_min: f64,
) -> PerturbationSweep {
    let rows: Vec<SweepRow> = amplitudes
        .iter()
        .map(|&a| {
            let f = fam.with_perturbation(g.scaled(a));
            SweepRow {
                amplitude: a,
                c2_norm: f.c2_norm(),
                bound: transversality_lower_bound(&profile_pairs(&f, pairs, grid), grid, delta_min),
            }
        })
        .collect();
    let threshold = rows.iter().find(|r| !r.bound.pass).map(|r| r.c2_norm);
    PerturbationSweep { rows, threshold }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::equilibrium_weights;
    use crate::ifs::{CoefficientFn, FamilyMap, ParamInterval, Perturbation};

    fn homogeneous(c: CoefficientFn, lo: f64, hi: f64) -> CantorFamily {
        CantorFamily::homogeneous_two_map(ParamInterval::new(lo, hi).unwrap(), c, 1.0).unwrap()
    }

    fn shrinking() -> CantorFamily {
        let c = CoefficientFn::linear(0.5, -1.0);
        CantorFamily::new(
            ParamInterval::new(0.05, 0.1).unwrap(),
            vec![
                FamilyMap::affine(c.clone(), CoefficientFn::constant(0.0)),
                FamilyMap::affine(c, CoefficientFn::linear(0.5, 1.0)),
            ],
            1.0,
        )
        .unwrap()
    }

    fn two_ratio() -> CantorFamily {
        CantorFamily::new(
            ParamInterval::new(0.0, 1.0).unwrap(),
            vec![
                FamilyMap::affine(CoefficientFn::constant(0.5), CoefficientFn::constant(0.0)),
                FamilyMap::affine(CoefficientFn::constant(0.25), CoefficientFn::constant(0.75)),
            ],
            1.0,
        )
        .unwrap()
    }

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    /// Mass of words with `k` ones and average `((n-k) ln 2 + k ln 4)/n` inside the window.
    fn window_mass(n: u64, p: f64, lo: f64, hi: f64) -> f64 {
        (0..=n)
            .filter(|&k| {
                let a = ((n - k) as f64 * 2f64.ln() + k as f64 * 4f64.ln()) / n as f64;
                lo < a && a < hi
            })
            .map(|k| binom(n, k) * (1.0 - p).powi((n - k) as i32) * p.powi(k as i32))
            .sum()
    }

    #[test]
    fn birkhoff_examples() {
        let fam = homogeneous(CoefficientFn::constant(0.4), 0.0, 1.0);
        let grid = fam.j.grid(9);
        let words = cylinder_enumerate(2, 8, 1 << 20).unwrap();
        assert!(birkhoff_window_check(&fam, &grid, &words, 1.2, 1.45).iter().all(|&b| b));
        assert!(birkhoff_window_check(&fam, &grid, &words, 1.4, 1.45)
            .iter()
            .all(|&b| !b));
        for u in &words {
            for a in birkhoff_averages(&fam, &grid, u) {
                assert!((a - 2.5f64.ln()).abs() <= 4.0 * f64::EPSILON);
            }
        }

        let fam = two_ratio();
        let w = equilibrium_weights(&[0.5, 0.25]).unwrap();
        let words = cylinder_enumerate(2, 10, 1 << 20).unwrap();
        let (lo, hi) = (0.80, 1.20);
        let ln2 = 2f64.ln();
        let kept = birkhoff_window_check(&fam, &grid, &words, lo, hi);
        let mass: f64 = words
            .iter()
            .zip(&kept)
            .filter(|p| *p.1)
            .map(|p| p.0.cylinder_mass(w.probs()))
            .sum();
        let expected = window_mass(10, w.probs()[1], lo * ln2, hi * ln2);
        assert!((mass - expected).abs() < 1e-12, "{mass} vs {expected}");
        assert!(mass > 0.0 && mass < 1.0);
    }

    #[test]
    fn smb_examples() {
        let words = cylinder_enumerate(2, 10, 1 << 20).unwrap();
        let u = BernoulliWeights::uniform(2).unwrap();
        assert!(smb_check(&u, &words, 0.95, 1.0).iter().all(|&b| b));
        let skew = BernoulliWeights::new(vec![0.9, 0.1]).unwrap();
        assert!(!smb_check(&skew, &words, 0.95, 1.0)[0]);
        assert!(smb_check(&skew, &words, 0.0, 1.0).iter().all(|&b| b));
    }

    #[test]
    fn omega_examples() {
        let fam = homogeneous(CoefficientFn::constant(0.4), 0.0, 1.0);
        let u = BernoulliWeights::uniform(2).unwrap();
        let grid = fam.j.grid(5);
        let s = select_omega_epsilon(&fam, &u, &grid, 10, 1.2, 1.45, 0.9, 1.0, 0.1).unwrap();
        assert_eq!(s.mass, 1.0);
        assert!(s.pass);

        let fam = two_ratio();
        let w = equilibrium_weights(&[0.5, 0.25]).unwrap();
        let ln2 = 2f64.ln();
        let s = select_omega_epsilon(&fam, &w, &grid, 12, 1.2, 1.5, 0.0, 1.0, 0.5).unwrap();
        let expected = window_mass(12, w.probs()[1], 1.2 * ln2, 1.5 * ln2);
        assert!((s.mass - expected).abs() < 1e-12);
        assert!(s.mass > 0.0 && s.mass < 1.0);

        let mut s = s;
        s.mass = 0.8;
        assert!(s.mass > 1.0 - 0.5);
        assert!(!(s.mass > 1.0 - 0.1));
    }

    #[test]
    fn omega_mass_monotone() {
        let fam = two_ratio();
        let w = equilibrium_weights(&[0.5, 0.25]).unwrap();
        let grid = fam.j.grid(3);
        let mass = |a: f64, b: f64, c3: f64| {
            select_omega_epsilon(&fam, &w, &grid, 10, a, b, 0.9, c3, 0.1)
                .unwrap()
                .mass
        };
        let base = mass(1.3, 1.5, 1.0);
        assert!(mass(1.2, 1.5, 1.0) >= base);
        assert!(mass(1.3, 1.7, 1.0) >= base);
        assert!(mass(1.3, 1.5, 4.0) >= base);
    }

    fn pairs_for(
        fam: &CantorFamily,
        n: usize,
        wedges: std::ops::RangeInclusive<usize>,
        per: usize,
    ) -> (Vec<SamplePair>, Vec<f64>) {
        let w = BernoulliWeights::uniform(2).unwrap();
        let grid = fam.j.grid(64);
        let s = select_omega_epsilon(fam, &w, &grid, n, 0.0, 100.0, 0.0, 1.0, 0.5).unwrap();
        (sample_pairs(&s, &w, wedges, per, 7).unwrap(), grid)
    }

    #[test]
    fn sampled_pairs_have_requested_wedge() {
        let fam = shrinking();
        let (pairs, _) = pairs_for(&fam, 8, 1..=10, 16);
        assert_eq!(pairs.len(), 160);
        for p in &pairs {
            assert_eq!(p.omega.wedge(&p.tau).unwrap(), p.wedge);
        }
        let (again, _) = pairs_for(&fam, 8, 1..=10, 16);
        assert_eq!(pairs, again);
    }

    #[test]
    fn diameter_examples() {
        let fam = homogeneous(CoefficientFn::constant(0.4), 0.0, 1.0);
        let (pairs, grid) = pairs_for(&fam, 8, 2..=12, 16);
        let prof = profile_pairs(&fam, &pairs, &grid);
        let ok = diameter_check(&prof, 2, 1.2, 1.0);
        assert!(ok.pass, "{ok:?}");
        let bad = diameter_check(&prof, 2, 1.4, 1.0);
        assert!(!bad.pass);
        assert!(bad.growth > GROWTH_TOL);
        let mut last = f64::INFINITY;
        for alpha in [1.4, 1.3, 1.2, 1.1, 1.0] {
            let c = diameter_check(&prof, 2, alpha, 1.0).c1_min;
            assert!(c <= last);
            last = c;
        }

        let (pairs, grid) = pairs_for(&fam, 4, 0..=0, 16);
        let b = diameter_check(&profile_pairs(&fam, &pairs, &grid), 2, 1.2, 1.0);
        assert!(b.pass && b.c1_min <= 1.0);
    }

    #[test]
    fn sublevel_examples() {
        let grid = ParamInterval::new(0.0, 0.5).unwrap().grid(2001);
        let step = 0.5 / 2000.0;
        let phi: Vec<f64> = grid.iter().map(|l| 1.0 - l).collect();
        assert!((sublevel_measure(&phi, step, -1.0, 0.1) - 0.1).abs() <= step);
        for v in [-1.0, -0.9, -0.75, -0.6] {
            assert!(sublevel_measure(&phi, step, v, 0.05) <= 2.0 * 0.05 + 1.01 * step);
        }
        let flat = vec![0.3; grid.len()];
        assert!((sublevel_measure(&flat, step, -0.3, 1e-6) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sublevel_and_lower_bound() {
        let fam = shrinking();
        let (pairs, _) = pairs_for(&fam, 8, 6..=10, 16);
        let grid = fam.j.grid(512);
        let prof = profile_pairs(&fam, &pairs, &grid);
        let r_grid = [0.01, 0.005, 0.002];
        let b = sublevel_check(&fam, &prof, &grid, &r_grid, 2, 1.45, 100.0).unwrap();
        assert!(b.pass, "{b:?}");
        assert!(matches!(
            sublevel_check(&fam, &prof, &grid, &[1e-5], 2, 1.45, 100.0),
            Err(Error::GridTooCoarse { .. })
        ));
        let lb = transversality_lower_bound(&prof, &grid, 1e-4);
        assert!(lb.pass, "{lb:?}");
        assert_eq!(lb.per_wedge.len(), 5);

        let constant = CantorFamily::new(
            fam.j,
            vec![
                FamilyMap::affine(CoefficientFn::constant(0.45), CoefficientFn::constant(0.0)),
                FamilyMap::affine(CoefficientFn::constant(0.45), CoefficientFn::constant(0.55)),
            ],
            1.0,
        )
        .unwrap();
        let prof = profile_pairs(&constant, &pairs, &grid);
        let lb = transversality_lower_bound(&prof, &grid, 1e-4);
        assert_eq!(lb.delta_star, 0.0);
        assert!(!lb.pass);
        let b = sublevel_check(&constant, &prof, &grid, &r_grid, 2, 1.45, 100.0).unwrap();
        assert!(!b.pass);
        assert_eq!(b.c2_analytic, f64::INFINITY);
    }

    #[test]
    fn large_perturbation_collapses_transversality() {
        let fam = shrinking();
        let w = BernoulliWeights::uniform(2).unwrap();
        let grid = fam.j.grid(64);
        let s = select_omega_epsilon(&fam, &w, &grid, 10, 0.0, 100.0, 0.0, 1.0, 0.5).unwrap();
        let pairs = sample_pairs(&s, &w, 6..=10, 16, 0).unwrap();
        // g = A·λ·x², whose mixed partial 2Ax works against dc/dλ = -1.
        let g = Perturbation::new(vec![crate::ifs::PerturbationTerm {
            coeff: 1.0,
            x_power: 2,
            trig: crate::ifs::Trig::None,
            freq: 1.0,
            lambda_poly: vec![0.0, 1.0],
        }]);
        let unit = g.c2_bound(fam.j);
        let amps: Vec<f64> = [0.0, 0.05, 0.2, 2.0].iter().map(|n| n / unit).collect();
        let sweep = perturbation_sweep(&fam, &g, &amps, &pairs, &grid, 1e-4);
        assert!(sweep.rows[0].bound.pass && sweep.rows[1].bound.pass);
        assert!(sweep.rows[1].bound.delta_star < sweep.rows[0].bound.delta_star);
        assert!(!sweep.rows[3].bound.pass);
        let t = sweep.threshold.unwrap();
        assert!(t > 0.05 && t <= 2.0 + 1e-12, "{t}");

        // A λ-independent bump barely moves the bound.
        let bump = perturbation_sweep(
            &fam,
            &Perturbation::sine_bump(1.0),
            &[0.0, 0.2 / 52.0],
            &pairs,
            &grid,
            1e-4,
        );
        assert!(bump.threshold.is_none());
    }
}
