use std::fmt;

use serde::{Deserialize, Serialize};

use super::checks::{
    diameter_check, profile_pairs, sample_pairs, select_omega_epsilon, sublevel_check, transversality_lower_bound,
    DiameterBound, LowerBound, OmegaEpsilonSet, SublevelBound,
};
use crate::dimension::{entropy, equilibrium_weights, lyapunov_exponent, FrostmanCertificate, OrbitSample};
use crate::error::{Error, Result};
use crate::ifs::{CantorFamily, ParamInterval};

/// Margins tried, largest first, when the exponents are suggested automatically.
const MARGINS: [f64; 8] = [0.25, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001];
const LYAPUNOV_GRID: usize = 33;

/// Exponents `α < β`, `γ` with the dimension `d_η` of the other measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m: usize,
    pub d_eta: f64,
    pub epsilon: f64,
    pub k0: usize,
}

impl ExponentTriple {
    pub fn new(alpha: f64, beta: f64, gamma: f64, m: usize, d_eta: f64, epsilon: f64, k0: usize) -> Result<Self> {
        let t = ExponentTriple {
            alpha,
            beta,
            gamma,
            m,
            d_eta,
            epsilon,
            k0,
        };
        if !(alpha > 0.0 && gamma > 0.0 && alpha < beta) {
            return Err(Error::InfeasibleTriple(format!(
                "need 0 < alpha < beta and gamma > 0, got alpha = {alpha}, beta = {beta}, gamma = {gamma}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let (first, second) = t.margins();
        if !(first > 0.0 && second > 0.0) {
            return Err(Error::InfeasibleTriple(format!(
                "d + gamma/beta - 1 = {first:.6}, d - (beta - gamma)/alpha = {second:.6}"
            )));
        }
        Ok(t)
    }

    /// `(d_η + γ/β − 1, d_η − (β − γ)/α)`; both positive iff the exponents are compatible.
    pub fn margins(&self) -> (f64, f64) {
        (
            self.d_eta + self.gamma / self.beta - 1.0,
            self.d_eta - (self.beta - self.gamma) / self.alpha,
        )
    }
}

/// Dimension of the measure `η` on the compact set `K`, with its Frostman check if one was run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaCertificate {
    pub d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frostman: Option<FrostmanCertificate>,
}

impl EtaCertificate {
    pub fn lebesgue() -> Self {
        EtaCertificate { d: 1.0, frostman: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// Parameter where the sampling measure is the measure of maximal dimension; defaults to the
    /// midpoint of `J`.
    pub lambda0: Option<f64>,
    /// Half-width of the window `W` around `lambda0`; the whole of `J` when absent.
    pub window_radius: Option<f64>,
    pub lambda_grid: usize,
    /// Cylinder depth of `Ω_ε`.
    pub depth: usize,
    pub k0: usize,
    pub max_wedge: usize,
    pub pairs_per_wedge: usize,
    pub epsilon: f64,
    pub delta_min: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub margin: Option<f64>,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Radii for the sublevel bound; a geometric grid from `10·step` to `|W|/2` by default.
    pub r_grid: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            lambda0: None,
            window_radius: None,
            lambda_grid: 512,
            depth: 12,
            k0: 6,
            max_wedge: 14,
            pairs_per_wedge: 64,
            epsilon: 0.1,
            delta_min: 1e-4,
            alpha: None,
            beta: None,
            gamma: None,
            margin: None,
            c1: 2.0,
            c2: 100.0,
            c3: 1.0,
            r_grid: None,
            seed: 0,
        }
    }
}

impl VerifySettings {
    pub fn window(&self, j: ParamInterval) -> Result<ParamInterval> {
        let l0 = self.lambda0.unwrap_or(j.midpoint());
        if !j.contains(l0) {
            return Err(Error::config(
                "verify.lambda0",
                format!("{l0} lies outside J = [{}, {}]", j.lo, j.hi),
            ));
        }
        match self.window_radius {
            None => Ok(j),
            Some(r) if r > 0.0 => ParamInterval::new((l0 - r).max(j.lo), (l0 + r).min(j.hi)),
            Some(r) => Err(Error::config(
                "verify.window_radius",
                format!("must be positive, got {r}"),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid < 2 {
            return Err(Error::config("verify.lambda_grid", "need at least two grid points"));
        }
        if self.depth == 0 {
            return Err(Error::config("verify.depth", "must be positive"));
        }
        if self.k0 == 0 || self.k0 > self.max_wedge {
            return Err(Error::config("verify.k0", "need 1 <= k0 <= max_wedge"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::config("verify.epsilon", "must lie in (0, 1)"));
        }
        for (name, v) in [("verify.c1", self.c1), ("verify.c2", self.c2), ("verify.c3", self.c3)] {
            if !(v > 0.0) {
                return Err(Error::config(name, "must be positive"));
            }
        }
        if let Some(rs) = &self.r_grid {
            if rs.is_empty() || rs.iter().any(|r| !(*r > 0.0)) {
                return Err(Error::config("verify.r_grid", "radii must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentBalance {
    pub dimension_margin: f64,
    pub exponent_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderDecay {
    pub gamma: f64,
    pub c3: f64,
    /// `max μ([u])·m^{γn}` over the retained cylinders.
    pub c3_min: f64,
    pub smb_mass: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub triple: ExponentTriple,
    pub window: ParamInterval,
    pub lambda0: f64,
    pub weights: Vec<f64>,
    pub entropy: f64,
    /// Range of the Lyapunov exponent over the window, in units of `ln m`.
    pub lyapunov_range: (f64, f64),
    pub eta: EtaCertificate,
    pub monotone: bool,
    pub pairs: usize,
    pub omega: OmegaEpsilonSet,
    pub exponents: ExponentBalance,
    pub diameter: DiameterBound,
    pub sublevel: SublevelBound,
    pub cylinder_decay: CylinderDecay,
    pub transversality: LowerBound,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub delta_star: f64,
    pub pass: bool,
}

/// Lyapunov exponents (units of `ln m`) of the sampling measure over the window.
fn lyapunov_range(fam: &CantorFamily, window: ParamInterval, p: &[f64], seed: u64) -> Result<(f64, f64)> {
    let lnm = (fam.alphabet() as f64).ln();
    let w = crate::dimension::BernoulliWeights::new(p.to_vec())?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for l in window.grid(LYAPUNOV_GRID) {
        let v = if fam.is_affine() {
            -fam.ratios_at(l).iter().zip(p).map(|(c, q)| q * c.ln()).sum::<f64>()
        } else {
            let sample = OrbitSample {
                seed,
                ..OrbitSample::default()
            };
            lyapunov_exponent(&fam.family_at(l)?, &w, sample)?.value
        };
        lo = lo.min(v / lnm);
        hi = hi.max(v / lnm);
    }
    Ok((lo, hi))
}

fn choose_triple(settings: &VerifySettings, m: usize, d_eta: f64, lyap: (f64, f64), h: f64) -> Result<ExponentTriple> {
    let build = |margin: f64| {
        ExponentTriple::new(
            settings.alpha.unwrap_or(lyap.0 - margin),
            settings.beta.unwrap_or(lyap.1 + margin),
            settings.gamma.unwrap_or(h - margin),
            m,
            d_eta,
            settings.epsilon,
            settings.k0,
        )
    };
    let margins: Vec<f64> = match settings.margin {
        Some(g) => vec![g],
        None => MARGINS.to_vec(),
    };
    let mut last = None;
    for g in margins {
        match build(g) {
            Ok(t) => return Ok(t),
            Err(e) => last = Some(e),
        }
    }
    Err(match last {
        Some(Error::InfeasibleTriple(msg)) => Error::InfeasibleTriple(format!(
            "no margin makes the exponents compatible (entropy/ln m = {h:.4}, Lyapunov/ln m in [{:.4}, {:.4}], d = {d_eta:.4}): {msg}",
            lyap.0, lyap.1
        )),
        Some(e) => e,
        None => Error::InfeasibleTriple("no margins to try".into()),
    })
}

/// Runs every check on `fam` against a measure of dimension `eta.d`.
pub fn assemble_report(
    fam: &CantorFamily,
    eta: &EtaCertificate,
    settings: &VerifySettings,
) -> Result<TransversalityReport> {
    settings.validate()?;
    let window = settings.window(fam.j)?;
    let lambda0 = settings.lambda0.unwrap_or(fam.j.midpoint());
    let m = fam.alphabet();
    let lnm = (m as f64).ln();
    let w = equilibrium_weights(&fam.ratios_at(lambda0))?;
    let h = entropy(&w) / lnm;
    let lyap = lyapunov_range(fam, window, w.probs(), settings.seed)?;
    let triple = choose_triple(settings, m, eta.d, lyap, h)?;

    let grid = window.grid(settings.lambda_grid);
    let omega = select_omega_epsilon(
        fam,
        &w,
        &grid,
        settings.depth,
        triple.alpha,
        triple.beta,
        triple.gamma,
        settings.c3,
        triple.epsilon,
    )?;
    let pairs = sample_pairs(
        &omega,
        &w,
        triple.k0..=settings.max_wedge,
        settings.pairs_per_wedge,
        settings.seed,
    )?;
    let profiles = profile_pairs(fam, &pairs, &grid);

    let (dimension_margin, exponent_margin) = triple.margins();
    let exponents = ExponentBalance {
        dimension_margin,
        exponent_margin,
        pass: dimension_margin > 0.0 && exponent_margin > 0.0,
    };
    let diameter = diameter_check(&profiles, m, triple.alpha, settings.c1);
    let step = window.width() / (grid.len() - 1) as f64;
    let r_grid = settings.r_grid.clone().unwrap_or_else(|| {
        let (lo, hi) = (10.0 * step, 0.5 * window.width());
        (0..6).map(|k| lo * (hi / lo).powf(k as f64 / 5.0)).collect()
    });
    let sublevel = sublevel_check(fam, &profiles, &grid, &r_grid, m, triple.beta, settings.c2)?;
    let c3_min = omega
        .words
        .iter()
        .zip(&omega.masses)
        .map(|(u, mu)| mu * (m as f64).powf(triple.gamma * u.len() as f64))
        .fold(0.0, f64::max);
    let cylinder_decay = CylinderDecay {
        gamma: triple.gamma,
        c3: settings.c3,
        c3_min,
        smb_mass: omega.smb_mass,
        pass: omega.pass,
    };
    let transversality = transversality_lower_bound(&profiles, &grid, settings.delta_min);

    let pass = exponents.pass && diameter.pass && sublevel.pass && cylinder_decay.pass;
    Ok(TransversalityReport {
        triple,
        window,
        lambda0,
        weights: w.probs().to_vec(),
        entropy: h,
        lyapunov_range: lyap,
        eta: eta.clone(),
        monotone: fam.monotonicity_check(settings.lambda_grid),
        pairs: pairs.len(),
        c1: diameter.c1_min,
        c2: sublevel.c2_empirical.max(sublevel.c2_analytic),
        c3: c3_min,
        delta_star: transversality.delta_star,
        omega,
        exponents,
        diameter,
        sublevel,
        cylinder_decay,
        transversality,
        pass,
    })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

impl fmt::Display for TransversalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.triple;
        writeln!(
            f,
            "window [{:.6}, {:.6}]  lambda0 {:.6}  pairs {}",
            self.window.lo, self.window.hi, self.lambda0, self.pairs
        )?;
        writeln!(
            f,
            "alpha {:.4}  beta {:.4}  gamma {:.4}  d_eta {:.4}  epsilon {}  k0 {}",
            t.alpha, t.beta, t.gamma, t.d_eta, t.epsilon, t.k0
        )?;
        writeln!(
            f,
            "entropy/ln m {:.4}  lyapunov/ln m [{:.4}, {:.4}]  monotone {}",
            self.entropy, self.lyapunov_range.0, self.lyapunov_range.1, self.monotone
        )?;
        writeln!(f, "{:<16} {:<6} detail", "check", "result")?;
        writeln!(
            f,
            "{:<16} {:<6} margins {:.4}, {:.4}",
            "exponents",
            verdict(self.exponents.pass),
            self.exponents.dimension_margin,
            self.exponents.exponent_margin
        )?;
        writeln!(
            f,
            "{:<16} {:<6} C1 min {:.4} (limit {}), growth {:.4}",
            "diameter",
            verdict(self.diameter.pass),
            self.diameter.c1_min,
            self.diameter.c1,
            self.diameter.growth
        )?;
        writeln!(
            f,
            "{:<16} {:<6} C2 empirical {:.4}, analytic {:.4} (limit {})",
            "sublevel",
            verdict(self.sublevel.pass),
            self.sublevel.c2_empirical,
            self.sublevel.c2_analytic,
            self.sublevel.c2
        )?;
        writeln!(
            f,
            "{:<16} {:<6} retained mass {:.6} at depth {}, C3 min {:.4}",
            "cylinder decay",
            verdict(self.cylinder_decay.pass),
            self.omega.mass,
            self.omega.depth,
            self.cylinder_decay.c3_min
        )?;
        writeln!(
            f,
            "{:<16} {:<6} delta* {:.6}, trend {:.4}",
            "transversality",
            verdict(self.transversality.pass),
            self.transversality.delta_star,
            self.transversality.trend
        )?;
        write!(f, "overall {}", verdict(self.pass))
    }
}
