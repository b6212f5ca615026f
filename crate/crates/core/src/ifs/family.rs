use serde::{Deserialize, Serialize};

use super::expr::{CoefficientFn, Jet, Perturbation};
use super::system::{AffineMap, Ifs, IfsMap};
use crate::error::{Error, Result};

const SLOPE_SLACK: f64 = 1e-9;
const DERIVATIVE_RTOL: f64 = 1e-6;

/// A closed parameter interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ParamInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("parameter interval [{lo}, {hi}] is empty")));
        }
        Ok(ParamInterval { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `n ≥ 2` evenly spaced points including both endpoints.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let step = self.width() / (n - 1) as f64;
        (0..n)
            .map(|k| if k == n - 1 { self.hi } else { self.lo + k as f64 * step })
            .collect()
    }
}

/// `f_i(x, λ) = c_i(λ)·x + b_i(λ) + g_i(x, λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMap {
    pub c: CoefficientFn,
    pub b: CoefficientFn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Perturbation>,
}

/// Partials of one family map at `(x, λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapJet {
    pub value: f64,
    pub dx: f64,
    pub dl: f64,
    pub dxdl: f64,
}

impl FamilyMap {
    pub fn affine(c: CoefficientFn, b: CoefficientFn) -> Self {
        FamilyMap { c, b, g: None }
    }

    fn g_jet(&self, x: f64, lambda: f64) -> Jet {
        self.g.as_ref().map(|g| g.jet(x, lambda)).unwrap_or_default()
    }

    pub fn jet(&self, x: f64, lambda: f64) -> MapJet {
        let g = self.g_jet(x, lambda);
        let c = self.c.value(lambda);
        let dc = self.c.derivative(lambda);
        MapJet {
            value: c * x + self.b.value(lambda) + g.g,
            dx: c + g.dx,
            dl: dc * x + self.b.derivative(lambda) + g.dl,
            dxdl: dc + g.dxdl,
        }
    }

    pub fn apply(&self, x: f64, lambda: f64) -> f64 {
        self.c.value(lambda) * x + self.b.value(lambda) + self.g_jet(x, lambda).g
    }

    pub fn is_affine(&self) -> bool {
        self.g.as_ref().is_none_or(Perturbation::is_zero)
    }
}

/// A λ-parametrised family of Cantor sets over the parameter interval `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorFamily {
    pub j: ParamInterval,
    pub maps: Vec<FamilyMap>,
    /// Claimed uniform bound `d|c_i|/dλ ≤ -delta`.
    pub delta: f64,
}

impl CantorFamily {
    pub fn new(j: ParamInterval, maps: Vec<FamilyMap>, delta: f64) -> Result<Self> {
        if maps.len() < 2 || maps.len() > 256 {
            return Err(Error::invalid("a family needs between 2 and 256 maps"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid(format!("delta must be positive, got {delta}")));
        }
        ParamInterval::new(j.lo, j.hi)?;
        Ok(CantorFamily { j, maps, delta })
    }

    /// The middle-α family `{c(λ)x, c(λ)x + 1 - c(λ)}`.
    pub fn homogeneous_two_map(j: ParamInterval, c: CoefficientFn, delta: f64) -> Result<Self> {
        let mut one_minus = CoefficientFn {
            poly: c.poly.iter().map(|a| -a).collect(),
            exp: c.exp.iter().map(|&(s, r)| (-s, r)).collect(),
            derivative: c.derivative.as_ref().map(|d| {
                Box::new(CoefficientFn {
                    poly: d.poly.iter().map(|a| -a).collect(),
                    exp: d.exp.iter().map(|&(s, r)| (-s, r)).collect(),
                    derivative: None,
                })
            }),
        };
        if one_minus.poly.is_empty() {
            one_minus.poly.push(0.0);
        }
        one_minus.poly[0] += 1.0;
        CantorFamily::new(
            j,
            vec![
                FamilyMap::affine(c.clone(), CoefficientFn::constant(0.0)),
                FamilyMap::affine(c, one_minus),
            ],
            delta,
        )
    }

    pub fn alphabet(&self) -> usize {
        self.maps.len()
    }

    pub fn is_affine(&self) -> bool {
        self.maps.iter().all(FamilyMap::is_affine)
    }

    /// `max_i ‖g_i‖_{C²}` over `[0,1] × J`.
    pub fn c2_norm(&self) -> f64 {
        self.maps
            .iter()
            .filter_map(|m| m.g.as_ref())
            .map(|g| g.c2_bound(self.j))
            .fold(0.0, f64::max)
    }

    /// `|c_i(λ)|` for every map.
    pub fn ratios_at(&self, lambda: f64) -> Vec<f64> {
        self.maps.iter().map(|m| m.c.value(lambda).abs()).collect()
    }

    /// Instantiates `C_λ`.
    pub fn family_at(&self, lambda: f64) -> Result<Ifs> {
        if !self.j.contains(lambda) {
            return Err(Error::OutOfRange {
                lambda,
                lo: self.j.lo,
                hi: self.j.hi,
            });
        }
        let maps = self
            .maps
            .iter()
            .map(|m| {
                let affine = AffineMap::new(m.c.value(lambda), m.b.value(lambda))?;
                match &m.g {
                    Some(g) => IfsMap::perturbed(affine, g.clone(), lambda),
                    None => Ok(IfsMap {
                        affine,
                        perturbation: None,
                        lambda,
                    }),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let ifs = Ifs::new(maps)?;
        if !ifs.validate_separation().separated {
            return Err(Error::SeparationViolated { lambda });
        }
        Ok(ifs)
    }

    /// True iff every finite-difference slope of `|c_i|` over a `grid`-point λ-grid is `≤ -δ`.
    pub fn monotonicity_check(&self, grid: usize) -> bool {
        self.worst_ratio_slope(grid) <= -self.delta + SLOPE_SLACK
    }

    /// Largest (least negative) finite-difference slope of `|c_i|` on the grid.
    pub fn worst_ratio_slope(&self, grid: usize) -> f64 {
        let pts = self.j.grid(grid);
        self.maps
            .iter()
            .flat_map(|m| {
                pts.windows(2)
                    .map(move |w| (m.c.value(w[1]).abs() - m.c.value(w[0]).abs()) / (w[1] - w[0]))
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cross-checks the supplied derivatives of `c_i`, `b_i` against central differences.
    pub fn check_derivatives(&self, grid: usize) -> Result<()> {
        let h = 1e-6 * self.j.width();
        let pts = self.j.grid(grid);
        for (i, m) in self.maps.iter().enumerate() {
            for (name, f) in [("c", &m.c), ("b", &m.b)] {
                for &l in &pts {
                    let (a, b) = ((l - h).max(self.j.lo - h), (l + h).min(self.j.hi + h));
                    let fd = (f.value(b) - f.value(a)) / (b - a);
                    let d = f.derivative(l);
                    if (d - fd).abs() > DERIVATIVE_RTOL * (1.0 + fd.abs()) {
                        return Err(Error::config(
                            format!("family.maps[{i}].{name}.derivative"),
                            format!("derivative {d} disagrees with finite difference {fd} at lambda = {l}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Same family with every perturbation scaled by `k`.
    pub fn with_perturbation_scale(&self, k: f64) -> CantorFamily {
        let mut fam = self.clone();
        for m in &mut fam.maps {
            if let Some(g) = &m.g {
                m.g = Some(g.scaled(k));
            }
        }
        fam
    }

    /// Replaces every map's perturbation with `g`.
    pub fn with_perturbation(&self, g: Perturbation) -> CantorFamily {
        let mut fam = self.clone();
        for m in &mut fam.maps {
            m.g = Some(g.clone());
        }
        fam
    }
}
