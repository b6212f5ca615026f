//! Closed-form coefficient functions `c_i(λ)`, `b_i(λ)` and perturbations `g_i(x, λ)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::family::ParamInterval;

/// `Σ poly[k] λ^k + Σ scale · exp(rate · λ)`.
///
/// An explicit `derivative` may be attached (as it is when read from a config file); otherwise
/// the derivative is taken analytically.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFn {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub poly: Vec<f64>,
    /// `(scale, rate)` pairs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exp: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative: Option<Box<CoefficientFn>>,
}

impl CoefficientFn {
    pub fn constant(v: f64) -> Self {
        CoefficientFn::poly(vec![v])
    }

    pub fn poly(coeffs: Vec<f64>) -> Self {
        CoefficientFn {
            poly: coeffs,
            ..Default::default()
        }
    }

    /// `c0 + c1 λ`.
    pub fn linear(c0: f64, c1: f64) -> Self {
        CoefficientFn::poly(vec![c0, c1])
    }

    pub fn exponential(scale: f64, rate: f64) -> Self {
        CoefficientFn {
            exp: vec![(scale, rate)],
            ..Default::default()
        }
    }

    pub fn with_derivative(mut self, d: CoefficientFn) -> Self {
        self.derivative = Some(Box::new(d));
        self
    }

    pub fn value(&self, lambda: f64) -> f64 {
        horner(&self.poly, lambda) + self.exp.iter().map(|&(s, r)| s * (r * lambda).exp()).sum::<f64>()
    }

    pub fn derivative(&self, lambda: f64) -> f64 {
        match &self.derivative {
            Some(d) => d.value(lambda),
            None => self.analytic_derivative(lambda),
        }
    }

    fn analytic_derivative(&self, lambda: f64) -> f64 {
        poly_derivative(&self.poly, lambda) + self.exp.iter().map(|&(s, r)| s * r * (r * lambda).exp()).sum::<f64>()
    }

    pub fn is_constant(&self) -> bool {
        self.poly.iter().skip(1).all(|&a| a == 0.0) && self.exp.iter().all(|&(s, r)| s == 0.0 || r == 0.0)
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_derivative(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &a)| acc * x + k as f64 * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trig {
    #[default]
    None,
    Sin,
    Cos,
}

/// One term `coeff · L(λ) · x^k · T(2π·freq·x)` where `L` is a polynomial in `λ`
/// (identically 1 when `lambda_poly` is empty) and `T` is sin, cos or 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationTerm {
    pub coeff: f64,
    #[serde(default)]
    pub x_power: u32,
    #[serde(default)]
    pub trig: Trig,
    #[serde(default = "one")]
    pub freq: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda_poly: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

/// Values of `g` and the partials used by the verifier at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub g: f64,
    pub dx: f64,
    pub dxx: f64,
    pub dl: f64,
    pub dxdl: f64,
}

impl std::ops::AddAssign for Jet {
    fn add_assign(&mut self, o: Jet) {
        self.g += o.g;
        self.dx += o.dx;
        self.dxx += o.dxx;
        self.dl += o.dl;
        self.dxdl += o.dxdl;
    }
}

impl PerturbationTerm {
    fn omega(&self) -> f64 {
        TAU * self.freq
    }

    /// `(T, T', T'')` at `x`.
    fn trig_jet(&self, x: f64) -> (f64, f64, f64) {
        let w = self.omega();
        match self.trig {
            Trig::None => (1.0, 0.0, 0.0),
            Trig::Sin => {
                let (s, c) = (w * x).sin_cos();
                (s, w * c, -w * w * s)
            }
            Trig::Cos => {
                let (s, c) = (w * x).sin_cos();
                (c, -w * s, -w * w * c)
            }
        }
    }

    fn lambda_factor(&self, lambda: f64) -> (f64, f64) {
        if self.lambda_poly.is_empty() {
            (1.0, 0.0)
        } else {
            (
                horner(&self.lambda_poly, lambda),
                poly_derivative(&self.lambda_poly, lambda),
            )
        }
    }

    fn jet(&self, x: f64, lambda: f64) -> Jet {
        let k = self.x_power as i32;
        let kf = k as f64;
        let p = |e: i32| if e < 0 { 0.0 } else { x.powi(e) };
        let (t, t1, t2) = self.trig_jet(x);
        let h = p(k) * t;
        let h1 = kf * p(k - 1) * t + p(k) * t1;
        let h2 = kf * (kf - 1.0) * p(k - 2) * t + 2.0 * kf * p(k - 1) * t1 + p(k) * t2;
        let (l, l1) = self.lambda_factor(lambda);
        let a = self.coeff;
        Jet {
            g: a * l * h,
            dx: a * l * h1,
            dxx: a * l * h2,
            dl: a * l1 * h,
            dxdl: a * l1 * h1,
        }
    }

    /// Bounds of `|g|, |g_x|, |g_xx|, |g_λ|, |g_xλ|` over `[0,1] × J`.
    fn bounds(&self, j: ParamInterval) -> [f64; 5] {
        let r = j.lo.abs().max(j.hi.abs());
        let (bl, bl1) = if self.lambda_poly.is_empty() {
            (1.0, 0.0)
        } else {
            let bl = self
                .lambda_poly
                .iter()
                .enumerate()
                .map(|(i, a)| a.abs() * r.powi(i as i32))
                .sum::<f64>();
            let bl1 = self
                .lambda_poly
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| i as f64 * a.abs() * r.powi(i as i32 - 1))
                .sum::<f64>();
            (bl, bl1)
        };
        let k = self.x_power as f64;
        let w = if self.trig == Trig::None {
            0.0
        } else {
            self.omega().abs()
        };
        let h0 = 1.0;
        let h1 = k + w;
        let h2 = k * (k - 1.0).max(0.0) + 2.0 * k * w + w * w;
        let a = self.coeff.abs();
        [a * bl * h0, a * bl * h1, a * bl * h2, a * bl1 * h0, a * bl1 * h1]
    }
}

/// A perturbation `g(x, λ)` as a finite sum of [`PerturbationTerm`]s.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perturbation {
    pub terms: Vec<PerturbationTerm>,
}

impl Perturbation {
    pub fn new(terms: Vec<PerturbationTerm>) -> Self {
        Perturbation { terms }
    }

    /// `amplitude · sin(2π x) · x`.
    pub fn sine_bump(amplitude: f64) -> Self {
        Perturbation::new(vec![PerturbationTerm {
            coeff: amplitude,
            x_power: 1,
            trig: Trig::Sin,
            freq: 1.0,
            lambda_poly: Vec::new(),
        }])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    pub fn jet(&self, x: f64, lambda: f64) -> Jet {
        let mut acc = Jet::default();
        for t in &self.terms {
            acc += t.jet(x, lambda);
        }
        acc
    }

    pub fn value(&self, x: f64, lambda: f64) -> f64 {
        self.jet(x, lambda).g
    }

    /// Rigorous upper bound on `max(|g|, |g_x|, |g_xx|, |g_xλ|)` over `[0,1] × J`.
    pub fn c2_bound(&self, j: ParamInterval) -> f64 {
        let mut sum = [0.0; 5];
        for t in &self.terms {
            for (s, b) in sum.iter_mut().zip(t.bounds(j)) {
                *s += b;
            }
        }
        sum[0].max(sum[1]).max(sum[2]).max(sum[4])
    }

    /// Upper bound on `|g_x|` over `[0,1] × J`.
    pub fn dx_bound(&self, j: ParamInterval) -> f64 {
        self.terms.iter().map(|t| t.bounds(j)[1]).sum()
    }

    /// Upper bound on `|g_xx|` over `[0,1] × J`.
    pub fn dxx_bound(&self, j: ParamInterval) -> f64 {
        self.terms.iter().map(|t| t.bounds(j)[2]).sum()
    }

    pub fn scaled(&self, k: f64) -> Perturbation {
        Perturbation::new(
            self.terms
                .iter()
                .map(|t| PerturbationTerm {
                    coeff: t.coeff * k,
                    ..t.clone()
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn coefficient_values_and_derivatives() {
        let c = CoefficientFn::linear(0.5, -1.0);
        assert!((c.value(0.1) - 0.4).abs() < 1e-15);
        assert_eq!(c.derivative(0.3), -1.0);
        let e = CoefficientFn::exponential(0.5, -1.0);
        assert!((e.derivative(0.2) - fd(|l| e.value(l), 0.2)).abs() < 1e-8);
        let p = CoefficientFn::poly(vec![1.0, 2.0, 3.0]);
        assert!((p.derivative(0.7) - (2.0 + 6.0 * 0.7)).abs() < 1e-14);
        assert!(CoefficientFn::constant(0.3).is_constant());
        assert!(!c.is_constant());
    }

    #[test]
    fn explicit_derivative_wins() {
        let c = CoefficientFn::linear(0.5, -1.0).with_derivative(CoefficientFn::constant(7.0));
        assert_eq!(c.derivative(0.0), 7.0);
    }

    #[test]
    fn perturbation_jet_matches_finite_differences() {
        let g = Perturbation::new(vec![
            PerturbationTerm {
                coeff: 0.01,
                x_power: 2,
                trig: Trig::Cos,
                freq: 1.5,
                lambda_poly: vec![1.0, 0.5, -2.0],
            },
            PerturbationTerm {
                coeff: -0.003,
                x_power: 0,
                trig: Trig::Sin,
                freq: 2.0,
                lambda_poly: vec![],
            },
            PerturbationTerm {
                coeff: 0.002,
                x_power: 3,
                trig: Trig::None,
                freq: 1.0,
                lambda_poly: vec![0.0, 1.0],
            },
        ]);
        for &(x, l) in &[(0.1, 0.2), (0.5, 0.05), (0.93, 0.4)] {
            let j = g.jet(x, l);
            assert!((j.dx - fd(|y| g.value(y, l), x)).abs() < 1e-8);
            assert!((j.dl - fd(|m| g.value(x, m), l)).abs() < 1e-8);
            assert!((j.dxx - fd(|y| g.jet(y, l).dx, x)).abs() < 1e-7);
            assert!((j.dxdl - fd(|m| g.jet(x, m).dx, l)).abs() < 1e-8);
        }
    }

    #[test]
    fn c2_bound_dominates_samples() {
        let g = Perturbation::sine_bump(1e-3);
        let j = ParamInterval::new(0.0, 1.0).unwrap();
        let bound = g.c2_bound(j);
        for i in 0..=200 {
            let x = i as f64 / 200.0;
            let jet = g.jet(x, 0.5);
            for v in [jet.g, jet.dx, jet.dxx, jet.dxdl] {
                assert!(v.abs() <= bound);
            }
        }
        // x·sin(2πx): second derivative bound 2·2π + (2π)^2.
        let expected = 1e-3 * (4.0 * std::f64::consts::PI + TAU * TAU);
        assert!((bound - expected).abs() < 1e-15);
    }
}
