use super::interval::IntervalUnion;
use crate::error::{Error, Result};

// Gaps within this relative size of each other count as equal.
const TIE_RTOL: f64 = 1e-9;

/// Newhouse thickness of a finite union, computed on its own gap structure.
///
/// For each bounded gap `G`, the bridge on either side runs from the edge of `G` to the nearest
/// strictly larger gap (or to the hull boundary); the thickness is the minimum over gaps of
/// `min(left bridge, right bridge) / |G|`.
pub fn thickness(a: &IntervalUnion) -> Result<f64> {
    let gaps = a.gaps();
    if gaps.is_empty() {
        return Err(Error::NoGaps);
    }
    let hull = a.hull().ok_or(Error::NoGaps)?;
    let ivs = a.intervals();
    let sizes: Vec<f64> = gaps.iter().map(|g| g.len()).collect();
    let larger = |j: usize, k: usize| sizes[j] > sizes[k] * (1.0 + TIE_RTOL);

    // Nearest strictly larger gap on each side, by monotone stacks.
    let mut left = vec![None; sizes.len()];
    let mut stack: Vec<usize> = Vec::new();
    for k in 0..sizes.len() {
        while stack.last().is_some_and(|&j| !larger(j, k)) {
            stack.pop();
        }
        left[k] = stack.last().copied();
        stack.push(k);
    }
    let mut right = vec![None; sizes.len()];
    stack.clear();
    for k in (0..sizes.len()).rev() {
        while stack.last().is_some_and(|&j| !larger(j, k)) {
            stack.pop();
        }
        right[k] = stack.last().copied();
        stack.push(k);
    }

    let mut tau = f64::INFINITY;
    for (k, g) in gaps.iter().enumerate() {
        let lb = g.lo - left[k].map_or(hull.lo, |j| ivs[j + 1].lo);
        let rb = right[k].map_or(hull.hi, |j| ivs[j].hi) - g.hi;
        tau = tau.min(lb.min(rb) / g.len());
    }
    Ok(tau)
}
