use serde::{Deserialize, Serialize};

use super::expr::Perturbation;
use super::family::ParamInterval;
use crate::error::{Error, Result};
use crate::geometry::{Interval, IntervalUnion};
use crate::symbolic::{cylinder_count, SymbolPath};

/// First-generation images must be separated by gaps larger than this.
pub const SEPARATION_TOL: f64 = 1e-12;

const CONTAINMENT_TOL: f64 = 1e-12;
const MONOTONE_GRID: usize = 1024;

/// `x ↦ c·x + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub c: f64,
    pub b: f64,
}

impl AffineMap {
    pub fn new(c: f64, b: f64) -> Result<Self> {
        if !(c.is_finite() && b.is_finite()) || c == 0.0 || c.abs() >= 1.0 {
            return Err(Error::invalid(format!(
                "contraction ratio must satisfy 0 < |c| < 1, got {c}"
            )));
        }
        let m = AffineMap { c, b };
        let img = m.image();
        if img.lo < -CONTAINMENT_TOL || img.hi > 1.0 + CONTAINMENT_TOL {
            return Err(Error::invalid(format!(
                "image of [0,1] under {c}x + {b} is [{}, {}], not inside [0,1]",
                img.lo, img.hi
            )));
        }
        Ok(m)
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.c * x + self.b
    }

    pub fn image(&self) -> Interval {
        Interval::ordered(self.b, self.c + self.b)
    }
}

/// One contraction `f(x) = c·x + b + g(x, λ)` of an [`Ifs`], with `λ` frozen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfsMap {
    pub affine: AffineMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    #[serde(default)]
    pub lambda: f64,
}

impl IfsMap {
    pub fn affine(c: f64, b: f64) -> Result<Self> {
        Ok(IfsMap {
            affine: AffineMap::new(c, b)?,
            perturbation: None,
            lambda: 0.0,
        })
    }

    pub fn perturbed(affine: AffineMap, g: Perturbation, lambda: f64) -> Result<Self> {
        let map = IfsMap {
            affine,
            perturbation: if g.is_zero() { None } else { Some(g) },
            lambda,
        };
        map.check_shape()?;
        Ok(map)
    }

    fn check_shape(&self) -> Result<()> {
        let (a, b) = (self.apply(0.0), self.apply(1.0));
        if a.min(b) < -CONTAINMENT_TOL || a.max(b) > 1.0 + CONTAINMENT_TOL {
            return Err(Error::invalid(format!(
                "image of [0,1] is [{}, {}], not inside [0,1]",
                a.min(b),
                a.max(b)
            )));
        }
        if let Some(g) = &self.perturbation {
            // |f''| ≤ bound, so a grid value above 10·bound·h keeps f' away from zero between nodes.
            let curvature = g.dxx_bound(self.param_point());
            let h = 1.0 / MONOTONE_GRID as f64;
            let sign = self.derivative(0.0).signum();
            for i in 0..=MONOTONE_GRID {
                let d = self.derivative(i as f64 * h);
                if d.signum() != sign || d.abs() <= 10.0 * curvature * h {
                    return Err(Error::invalid(format!(
                        "perturbed map is not uniformly monotone near x = {}",
                        i as f64 * h
                    )));
                }
            }
            let lip = self.lipschitz();
            if lip >= 1.0 {
                return Err(Error::invalid(format!(
                    "perturbed map is not a contraction (Lipschitz bound {lip})"
                )));
            }
        }
        Ok(())
    }

    fn param_point(&self) -> ParamInterval {
        ParamInterval {
            lo: self.lambda,
            hi: self.lambda,
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        let base = self.affine.apply(x);
        match &self.perturbation {
            Some(g) => base + g.value(x, self.lambda),
            None => base,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.perturbation {
            Some(g) => self.affine.c + g.jet(x, self.lambda).dx,
            None => self.affine.c,
        }
    }

    /// `f(p) - f(q)` without cancelling the affine part.
    pub fn apply_difference(&self, p: f64, q: f64, d: f64) -> f64 {
        let lin = self.affine.c * d;
        match &self.perturbation {
            Some(g) => lin + (g.value(p, self.lambda) - g.value(q, self.lambda)),
            None => lin,
        }
    }

    /// Upper bound on `|f'|` over `[0, 1]`.
    pub fn lipschitz(&self) -> f64 {
        match &self.perturbation {
            Some(g) => self.affine.c.abs() + g.dx_bound(self.param_point()),
            None => self.affine.c.abs(),
        }
    }

    pub fn is_affine(&self) -> bool {
        self.perturbation.is_none()
    }

    /// `f([lo, hi])`, using monotonicity.
    pub fn image_of(&self, iv: Interval) -> Interval {
        Interval::ordered(self.apply(iv.lo), self.apply(iv.hi))
    }

    pub fn image(&self) -> Interval {
        self.image_of(Interval { lo: 0.0, hi: 1.0 })
    }
}

/// Outcome of the strong-separation test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub separated: bool,
    /// `(map index, image of [0,1])`, sorted by left endpoint.
    pub images: Vec<(usize, Interval)>,
    /// The `m - 1` gaps between consecutive images (negative for overlaps).
    pub gaps: Vec<f64>,
    /// First pair of map indices whose images are not separated.
    pub offending: Option<(usize, usize)>,
}

/// A point `Π(ω)` of the attractor with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodingPoint {
    pub value: f64,
    pub error_bound: f64,
}

/// A finite system of monotone contractions of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ifs {
    maps: Vec<IfsMap>,
}

impl Ifs {
    pub fn new(maps: Vec<IfsMap>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::invalid("an IFS needs at least two maps"));
        }
        if maps.len() > 256 {
            return Err(Error::invalid("at most 256 maps are supported"));
        }
        for m in &maps {
            m.check_shape()?;
        }
        Ok(Ifs { maps })
    }

    pub fn from_affine(pairs: &[(f64, f64)]) -> Result<Self> {
        Ifs::new(
            pairs
                .iter()
                .map(|&(c, b)| IfsMap::affine(c, b))
                .collect::<Result<_>>()?,
        )
    }

    /// `{a·x, a·x + 1 - a}`.
    pub fn middle_alpha(a: f64) -> Result<Self> {
        Ifs::from_affine(&[(a, 0.0), (a, 1.0 - a)])
    }

    pub fn maps(&self) -> &[IfsMap] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn is_affine(&self) -> bool {
        self.maps.iter().all(IfsMap::is_affine)
    }

    /// `|c_i|` of the affine parts.
    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.affine.c.abs()).collect()
    }

    pub fn validate_separation(&self) -> SeparationReport {
        let mut images: Vec<(usize, Interval)> = self.maps.iter().map(|m| m.image()).enumerate().collect();
        images.sort_by(|a, b| a.1.lo.total_cmp(&b.1.lo).then(a.0.cmp(&b.0)));
        let gaps: Vec<f64> = images.windows(2).map(|w| w[1].1.lo - w[0].1.hi).collect();
        let offending = gaps
            .iter()
            .position(|&g| g <= SEPARATION_TOL)
            .map(|k| (images[k].0, images[k + 1].0));
        SeparationReport {
            separated: offending.is_none(),
            images,
            gaps,
            offending,
        }
    }

    /// Depth-`n` cylinder intervals `f_u([0,1])`, one per word, in lexicographic word order.
    pub fn cylinder_intervals(&self, n: usize, cap: u64) -> Result<Vec<Interval>> {
        cylinder_count(self.len(), n, cap)?;
        let mut level = vec![Interval { lo: 0.0, hi: 1.0 }];
        for _ in 0..n {
            let mut next = Vec::with_capacity(level.len() * self.len());
            for map in &self.maps {
                next.extend(level.iter().map(|&iv| map.image_of(iv)));
            }
            level = next;
        }
        Ok(level)
    }

    /// The generation cover `I_n`.
    pub fn generation_cover(&self, n: usize, cap: u64) -> Result<IntervalUnion> {
        Ok(IntervalUnion::from_intervals(self.cylinder_intervals(n, cap)?, 0.0))
    }

    /// `f_{ω_0} ∘ ... ∘ f_{ω_{depth-1}}(0)`.
    pub fn truncated_point(&self, path: &SymbolPath, depth: usize) -> CodingPoint {
        let mut x = 0.0;
        let mut err = 1.0;
        for k in (0..depth).rev() {
            let map = &self.maps[path.symbol(k) as usize];
            x = map.apply(x);
            err *= map.lipschitz();
        }
        CodingPoint {
            value: x,
            error_bound: err,
        }
    }

    /// `Π(ω)`. Exact for affine systems; otherwise truncated at `depth` with the error bounded
    /// by the product of the Lipschitz constants along the word.
    pub fn coding_point(&self, path: &SymbolPath, depth: usize) -> Result<CodingPoint> {
        if path.alphabet() != self.len() {
            return Err(Error::invalid("symbol path alphabet differs from the IFS size"));
        }
        if !self.is_affine() {
            return Ok(self.truncated_point(path, depth.max(1)));
        }
        let (mut cc, mut bb) = (1.0, 0.0);
        for &s in path.tail().iter().rev() {
            let a = &self.maps[s as usize].affine;
            cc *= a.c;
            bb = a.c * bb + a.b;
        }
        let mut x = bb / (1.0 - cc);
        for &s in path.prefix().iter().rev() {
            x = self.maps[s as usize].apply(x);
        }
        Ok(CodingPoint {
            value: x,
            error_bound: 0.0,
        })
    }
}
