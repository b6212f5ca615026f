//! Orbits of eventually periodic points under a parameter family, the difference
//! `φ(λ) = Π_λ(ω) − Π_λ(τ)` and its λ-derivative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::{CantorFamily, MapJet};
use crate::symbolic::{SymbolPath, Word};

const FIXED_POINT_TOL: f64 = 1e-17;
const FIXED_POINT_MAX_ITER: usize = 10_000;

/// `P_s = Π_λ(σ^s ω)` and `dP_s/dλ` for `s = 0..=n`.
#[derive(Debug, Clone)]
pub(crate) struct Orbit {
    pub points: Vec<f64>,
    pub dl: Vec<f64>,
    pub error_bound: f64,
}

fn jet(fam: &CantorFamily, sym: u8, x: f64, lambda: f64) -> MapJet {
    fam.maps[sym as usize].jet(x, lambda)
}

/// `g(p, λ) − g(q, λ)` and `g_λ(p, λ) − g_λ(q, λ)` for one map (zero when unperturbed).
fn g_differences(fam: &CantorFamily, sym: u8, p: f64, q: f64, lambda: f64) -> (f64, f64) {
    match &fam.maps[sym as usize].g {
        Some(g) => {
            let (a, b) = (g.jet(p, lambda), g.jet(q, lambda));
            (a.g - b.g, a.dl - b.dl)
        }
        None => (0.0, 0.0),
    }
}

/// Fixed point of `f_{t_0} ∘ ... ∘ f_{t_{p-1}}` with an error bound.
fn tail_fixed_point(fam: &CantorFamily, tail: &[u8], lambda: f64) -> (f64, f64) {
    if tail.iter().all(|&s| fam.maps[s as usize].is_affine()) {
        let (mut cc, mut bb) = (1.0, 0.0);
        for &s in tail.iter().rev() {
            let m = &fam.maps[s as usize];
            let c = m.c.value(lambda);
            cc *= c;
            bb = c * bb + m.b.value(lambda);
        }
        return (bb / (1.0 - cc), 0.0);
    }
    let lip: f64 = tail
        .iter()
        .map(|&s| {
            let m = &fam.maps[s as usize];
            m.c.value(lambda).abs() + m.g.as_ref().map_or(0.0, |g| g.dx_bound(fam.j))
        })
        .product();
    let compose = |mut y: f64| {
        for &s in tail.iter().rev() {
            y = fam.maps[s as usize].apply(y, lambda);
        }
        y
    };
    let mut y = 0.5;
    let mut step = 1.0;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let next = compose(y);
        step = (next - y).abs();
        y = next;
        if step <= FIXED_POINT_TOL {
            break;
        }
    }
    let bound = if lip < 1.0 { step * lip / (1.0 - lip) } else { step };
    (y, bound)
}

/// Orbit of `path` up to index `n` with λ-derivatives propagated by the chain rule.
pub(crate) fn orbit(fam: &CantorFamily, path: &SymbolPath, lambda: f64, n: usize) -> Orbit {
    let pre = path.prefix().len();
    let tail = path.tail();
    let p = tail.len();
    let (z0, error_bound) = tail_fixed_point(fam, tail, lambda);

    // Periodic part: z_j = f_{t_j}(z_{j+1}), indices mod p.
    let mut z = vec![z0; p];
    for j in (1..p).rev() {
        z[j] = fam.maps[tail[j] as usize].apply(z[(j + 1) % p], lambda);
    }
    let jets: Vec<MapJet> = (0..p).map(|j| jet(fam, tail[j], z[(j + 1) % p], lambda)).collect();
    let (mut num, mut prod) = (0.0, 1.0);
    for jt in &jets {
        num += prod * jt.dl;
        prod *= jt.dx;
    }
    let mut dz = vec![num / (1.0 - prod); p];
    for j in (1..p).rev() {
        dz[j] = jets[j].dl + jets[j].dx * dz[(j + 1) % p];
    }

    let len = n.max(pre) + 1;
    let mut points = vec![0.0; len];
    let mut dl = vec![0.0; len];
    for s in pre..len {
        points[s] = z[(s - pre) % p];
        dl[s] = dz[(s - pre) % p];
    }
    for s in (0..pre).rev() {
        let jt = jet(fam, path.symbol(s), points[s + 1], lambda);
        points[s] = jt.value;
        dl[s] = jt.dl + jt.dx * dl[s + 1];
    }
    points.truncate(n + 1);
    dl.truncate(n + 1);
    Orbit {
        points,
        dl,
        error_bound,
    }
}

/// The multipliers `l^(s) = ∂f_{ω_{s-1}}/∂x (P_s)` for `s = 1..=n`.
pub fn multipliers(fam: &CantorFamily, lambda: f64, path: &SymbolPath, n: usize) -> Result<Vec<f64>> {
    if path.alphabet() != fam.alphabet() {
        return Err(Error::invalid("symbol path alphabet differs from the family size"));
    }
    let orb = orbit(fam, path, lambda, n);
    Ok((1..=n)
        .map(|s| jet(fam, path.symbol(s - 1), orb.points[s], lambda).dx)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiValue {
    pub value: f64,
    pub error_bound: f64,
}

/// `dφ/dλ` split into three parts along the common prefix of length `wedge`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiDerivative {
    /// Chain-rule derivative of `Π_λ(ω) − Π_λ(τ)`.
    pub total: f64,
    /// `Σ (product of multipliers so far)·(c'·D + ∂λ Δg)`: how the maps themselves move with `λ`.
    pub direct: f64,
    /// `Σ ∂λ f(Q)·(product along ω − product along τ)`: the multipliers differ between the orbits.
    pub mismatch: f64,
    /// Contribution of the two points at the end of the common prefix.
    pub tail: f64,
    pub wedge: usize,
    /// Summands of `direct`, one per level of the common prefix.
    pub direct_terms: Vec<f64>,
    /// `Π_{s=1}^{wedge} l^(s)` along the orbit of `ω`.
    pub multiplier_product: f64,
}

impl PhiDerivative {
    /// `|dφ/dλ| / (n·|Π l^(s)|)`, undefined for wedge 0.
    pub fn normalized(&self) -> Option<f64> {
        (self.wedge > 0).then(|| self.total.abs() / (self.wedge as f64 * self.multiplier_product.abs()))
    }
}

fn check_pair(fam: &CantorFamily, omega: &SymbolPath, tau: &SymbolPath) -> Result<usize> {
    if omega.alphabet() != fam.alphabet() || tau.alphabet() != fam.alphabet() {
        return Err(Error::invalid("symbol path alphabet differs from the family size"));
    }
    omega.wedge(tau)
}

/// `P_s − Q_s` for `s = 0..=n`, propagated from level `n` without subtracting nearby values.
fn differences(fam: &CantorFamily, omega: &SymbolPath, p: &Orbit, q: &Orbit, n: usize, lambda: f64) -> Vec<f64> {
    let mut d = vec![0.0; n + 1];
    d[n] = p.points[n] - q.points[n];
    for s in (0..n).rev() {
        let sym = omega.symbol(s);
        let c = fam.maps[sym as usize].c.value(lambda);
        let (dg, _) = g_differences(fam, sym, p.points[s + 1], q.points[s + 1], lambda);
        d[s] = c * d[s + 1] + dg;
    }
    d
}

/// Evaluates `φ` and `dφ/dλ` together at one parameter value.
pub(crate) fn phi_and_derivative(
    fam: &CantorFamily,
    omega: &SymbolPath,
    tau: &SymbolPath,
    wedge: usize,
    lambda: f64,
) -> (PhiValue, PhiDerivative) {
    let n = wedge;
    let p = orbit(fam, omega, lambda, n);
    let q = orbit(fam, tau, lambda, n);
    let d = differences(fam, omega, &p, &q, n, lambda);

    let (mut prod_p, mut prod_q) = (1.0, 1.0);
    let (mut direct, mut mismatch) = (0.0, 0.0);
    let mut direct_terms = Vec::with_capacity(n);
    for i in 1..=n {
        let sym = omega.symbol(i - 1);
        let jp = jet(fam, sym, p.points[i], lambda);
        let jq = jet(fam, sym, q.points[i], lambda);
        let dc = fam.maps[sym as usize].c.derivative(lambda);
        let (_, dgl) = g_differences(fam, sym, p.points[i], q.points[i], lambda);
        let term = prod_p * (dc * d[i] + dgl);
        direct_terms.push(term);
        direct += term;
        mismatch += jq.dl * (prod_p - prod_q);
        prod_p *= jp.dx;
        prod_q *= jq.dx;
    }
    let tail = prod_p * p.dl[n] - prod_q * q.dl[n];
    (
        PhiValue {
            value: d[0],
            error_bound: p.error_bound + q.error_bound,
        },
        PhiDerivative {
            total: p.dl[0] - q.dl[0],
            direct,
            mismatch,
            tail,
            wedge: n,
            direct_terms,
            multiplier_product: prod_p,
        },
    )
}

/// `φ_{ω,τ}(λ) = Π_λ(ω) − Π_λ(τ)`.
pub fn phi(fam: &CantorFamily, omega: &SymbolPath, tau: &SymbolPath, lambda: f64) -> Result<PhiValue> {
    let w = check_pair(fam, omega, tau)?;
    Ok(phi_and_derivative(fam, omega, tau, w, lambda).0)
}

pub fn dphi_dlambda(fam: &CantorFamily, omega: &SymbolPath, tau: &SymbolPath, lambda: f64) -> Result<PhiDerivative> {
    let w = check_pair(fam, omega, tau)?;
    Ok(phi_and_derivative(fam, omega, tau, w, lambda).1)
}

/// Worst bounded-distortion constant `max(ratio/|Π l|, |Π l|/ratio)` over `words`, where
/// `ratio = |f_u(x) − f_u(y)| / |x − y|` and the multipliers are taken along the orbit of `x`.
pub fn distortion_check(fam: &CantorFamily, lambda: f64, words: &[Word], x: f64, y: f64) -> Result<f64> {
    if x == y || !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::invalid("distortion needs two distinct points of [0, 1]"));
    }
    let mut worst = 1.0f64;
    for u in words {
        if u.alphabet() != fam.alphabet() {
            return Err(Error::invalid("word alphabet differs from the family size"));
        }
        let (mut p, mut q) = (x, y);
        let (mut prod, mut rel) = (1.0, 1.0);
        for &s in u.symbols().iter().rev() {
            let jp = jet(fam, s, p, lambda);
            let (dg, _) = g_differences(fam, s, p, q, lambda);
            rel = fam.maps[s as usize].c.value(lambda) * rel + dg / (x - y);
            prod *= jp.dx;
            q = fam.maps[s as usize].apply(q, lambda);
            p = jp.value;
        }
        let (ratio, prod) = (rel.abs(), prod.abs());
        worst = worst.max(ratio / prod).max(prod / ratio);
    }
    Ok(worst)
}
