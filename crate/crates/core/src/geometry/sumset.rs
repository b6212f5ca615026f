use serde::{Deserialize, Serialize};

use super::interval::{minkowski_sum_with_cap, IntervalUnion};
use crate::error::{Error, Result};
use crate::ifs::Ifs;

/// Geometric-decay ratios below this mark a sequence as shrinking to zero.
pub const DECAY_RATIO_THRESHOLD: f64 = 0.95;
const FIT_WINDOW: usize = 4;

/// Second summand: another IFS (covered generation by generation) or a fixed cover of `K`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverSource {
    Ifs(Ifs),
    Fixed(IntervalUnion),
}

impl CoverSource {
    pub fn cover(&self, depth: usize, cap: u64) -> Result<IntervalUnion> {
        match self {
            CoverSource::Ifs(ifs) => ifs.generation_cover(depth, cap),
            CoverSource::Fixed(u) => Ok(u.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictHint {
    ShrinkingToZero,
    Interval,
    Plateau,
}

impl VerdictHint {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictHint::ShrinkingToZero => "shrinking-to-zero",
            VerdictHint::Interval => "interval",
            VerdictHint::Plateau => "plateau",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumCoverRow {
    pub depth: usize,
    pub interval_count: usize,
    pub measure: f64,
    /// Hint computed from depths `1..=depth`.
    pub hint: VerdictHint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumCoverAnalysis {
    pub rows: Vec<SumCoverRow>,
    /// Geometric ratio fitted over the last few depths, when at least two are available.
    pub fitted_ratio: Option<f64>,
    pub hint: VerdictHint,
}

/// Measures of `cover1(k) + cover2(k)` for `k = 1..=n`.
pub fn sum_cover_analysis(
    ifs1: &Ifs,
    set2: &CoverSource,
    n: usize,
    cylinder_cap: u64,
    pair_cap: u64,
) -> Result<SumCoverAnalysis> {
    // Separated cylinders never merge, so the deepest level fixes the work; refuse it up front.
    let grow = |m: usize| (m as u128).saturating_pow(n as u32);
    let first = grow(ifs1.len());
    let second = match set2 {
        CoverSource::Ifs(ifs) => grow(ifs.len()),
        CoverSource::Fixed(u) => u.len() as u128,
    };
    if first.max(second) > cylinder_cap as u128 {
        return Err(Error::CapExceeded {
            what: "cylinders",
            requested: first.max(second),
            cap: cylinder_cap as u128,
        });
    }
    if first.saturating_mul(second) > pair_cap as u128 {
        return Err(Error::CapExceeded {
            what: "interval pairs",
            requested: first.saturating_mul(second),
            cap: pair_cap as u128,
        });
    }
    let mut rows = Vec::with_capacity(n);
    let mut measures = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n);
    for k in 1..=n {
        let a = ifs1.generation_cover(k, cylinder_cap)?;
        let b = set2.cover(k, cylinder_cap)?;
        let sum = minkowski_sum_with_cap(&a, &b, pair_cap)?;
        measures.push(sum.measure());
        counts.push(sum.len());
        let (hint, _) = classify(&measures, &counts);
        rows.push(SumCoverRow {
            depth: k,
            interval_count: sum.len(),
            measure: sum.measure(),
            hint,
        });
    }
    let (hint, fitted_ratio) = classify(&measures, &counts);
    Ok(SumCoverAnalysis {
        rows,
        fitted_ratio,
        hint,
    })
}

fn classify(measures: &[f64], counts: &[usize]) -> (VerdictHint, Option<f64>) {
    let ratio = fitted_ratio(measures);
    let hint = if !counts.is_empty() && counts.iter().all(|&c| c == 1) {
        VerdictHint::Interval
    } else if ratio.is_some_and(|r| r < DECAY_RATIO_THRESHOLD) {
        VerdictHint::ShrinkingToZero
    } else {
        VerdictHint::Plateau
    };
    (hint, ratio)
}

/// `exp(slope)` of the least-squares line through `(k, ln measure_k)` over the last depths.
fn fitted_ratio(measures: &[f64]) -> Option<f64> {
    let tail = &measures[measures.len().saturating_sub(FIT_WINDOW)..];
    if tail.len() < 2 {
        return None;
    }
    if tail.iter().any(|&m| m <= 0.0) {
        return Some(0.0);
    }
    let n = tail.len() as f64;
    let xs: Vec<f64> = (0..tail.len()).map(|k| k as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|m| m.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some((sxy / sxx).exp())
}
