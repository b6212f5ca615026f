use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    /// `dim C_a + dim C_b < 1`: the sum is a Cantor set.
    #[serde(rename = "cantor_zone")]
    CantorZone,
    /// `τ(C_a)·τ(C_b) > 1`: the sum is an interval.
    #[serde(rename = "interval_zone")]
    IntervalZone,
    /// Neither criterion decides.
    #[serde(rename = "region_R")]
    RegionR,
}

impl RegionTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionTag::CantorZone => "cantor_zone",
            RegionTag::IntervalZone => "interval_zone",
            RegionTag::RegionR => "region_R",
        }
    }

    /// Gray level used in region-map images.
    pub fn pixel(&self) -> u8 {
        match self {
            RegionTag::CantorZone => 0,
            RegionTag::RegionR => 1,
            RegionTag::IntervalZone => 2,
        }
    }
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub tag: RegionTag,
    pub dim_sum: f64,
    pub thickness_product: f64,
}

/// Gap Lemma hypothesis `τ1·τ2 > 1`.
pub fn gap_lemma_predicate(tau1: f64, tau2: f64) -> bool {
    tau1 * tau2 > 1.0
}

/// Classifies `C_a + C_b` for middle-α sets by the dimension and thickness criteria.
pub fn middle_alpha_classify(a: f64, b: f64) -> Result<RegionVerdict> {
    for (name, v) in [("a", a), ("b", b)] {
        if !(v > 0.0 && v < 0.5) {
            return Err(Error::invalid(format!("{name} = {v} must lie in (0, 1/2)")));
        }
    }
    let ln2 = std::f64::consts::LN_2;
    let dim_sum = ln2 / (1.0 / a).ln() + ln2 / (1.0 / b).ln();
    let thickness_product = a / (1.0 - 2.0 * a) * (b / (1.0 - 2.0 * b));
    let tag = if dim_sum < 1.0 {
        RegionTag::CantorZone
    } else if gap_lemma_predicate(a / (1.0 - 2.0 * a), b / (1.0 - 2.0 * b)) {
        RegionTag::IntervalZone
    } else {
        RegionTag::RegionR
    };
    Ok(RegionVerdict {
        tag,
        dim_sum,
        thickness_product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_lemma() {
        assert!(gap_lemma_predicate(2.0, 2.0));
        assert!(!gap_lemma_predicate(1.0, 1.0));
        assert!(!gap_lemma_predicate(0.5, 1.5));
    }

    #[test]
    fn classify_examples() {
        let v = middle_alpha_classify(0.2, 0.2).unwrap();
        assert_eq!(v.tag, RegionTag::CantorZone);
        assert!((v.dim_sum - 2.0 * 2f64.ln() / 5f64.ln()).abs() < 1e-15);
        assert!((v.dim_sum - 0.8614).abs() < 1e-4);

        let v = middle_alpha_classify(0.4, 0.4).unwrap();
        assert_eq!(v.tag, RegionTag::IntervalZone);
        assert!((v.thickness_product - 4.0).abs() < 1e-12);

        let v = middle_alpha_classify(0.3, 0.35).unwrap();
        assert_eq!(v.tag, RegionTag::RegionR);
        assert!((v.dim_sum - 1.236).abs() < 1e-3);
        assert!((v.thickness_product - 0.875).abs() < 1e-12);
    }

    #[test]
    fn classify_rejects_out_of_range() {
        assert!(middle_alpha_classify(0.5, 0.2).is_err());
        assert!(middle_alpha_classify(0.2, 0.0).is_err());
    }

    #[test]
    fn tag_invariant() {
        for i in 1..50 {
            for j in 1..50 {
                let (a, b) = (i as f64 / 100.0, j as f64 / 100.0);
                let v = middle_alpha_classify(a, b).unwrap();
                match v.tag {
                    RegionTag::CantorZone => assert!(v.dim_sum < 1.0),
                    RegionTag::IntervalZone => assert!(v.thickness_product > 1.0 && v.dim_sum >= 1.0),
                    RegionTag::RegionR => assert!(v.dim_sum >= 1.0 && v.thickness_product <= 1.0),
                }
                assert_eq!(v.tag, middle_alpha_classify(b, a).unwrap().tag);
            }
        }
    }
}
