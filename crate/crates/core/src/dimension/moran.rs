use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;

/// Similarity dimension: the root `s ∈ (0, 1]` of `Σ r_i^s = 1`.
pub fn moran_dimension(ratios: &[f64]) -> Result<f64> {
    if ratios.len() < 2 {
        return Err(Error::invalid("Moran equation needs at least two ratios"));
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::invalid(format!("contraction ratio {r} outside (0, 1)")));
    }
    let sum: f64 = ratios.iter().sum();
    if sum > 1.0 + 1e-15 {
        return Err(Error::NoRoot { sum });
    }
    let a = ratios[0];
    if ratios.iter().all(|&r| r == a) {
        return Ok((ratios.len() as f64).ln() / (1.0 / a).ln());
    }
    // Σ r^s - 1 is strictly decreasing, positive at 0 and ≤ 0 at 1.
    let f = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let s = moran_dimension(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((s - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!((s - 0.6309297536).abs() < 1e-10);
        assert_eq!(moran_dimension(&[0.5, 0.5]).unwrap(), 1.0);
        // x + x² = 1 with x = 2^{-s}.
        let golden = (5f64.sqrt() + 1.0) / 2.0;
        let s = moran_dimension(&[0.5, 0.25]).unwrap();
        assert!((s - golden.log2()).abs() < 1e-12);
        assert!((s - 0.6942419).abs() < 1e-7);
    }

    #[test]
    fn errors() {
        assert!(matches!(moran_dimension(&[0.6, 0.6]), Err(Error::NoRoot { .. })));
        assert!(moran_dimension(&[1.2, 0.1]).is_err());
        assert!(moran_dimension(&[0.3]).is_err());
    }

    proptest! {
        #[test]
        fn root_residual_and_monotonicity(rs in proptest::collection::vec(0.01f64..0.3, 2..4), k in 0usize..3, bump in 0.0f64..0.05) {
            let s = moran_dimension(&rs).unwrap();
            let resid: f64 = rs.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
            prop_assert!(resid.abs() <= 1e-10);
            let mut bigger = rs.clone();
            let k = k % rs.len();
            bigger[k] += bump;
            prop_assert!(moran_dimension(&bigger).unwrap() >= s - 1e-12);
        }
    }
}
