use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on `|A|·|B|` for [`minkowski_sum`].
pub const DEFAULT_PAIR_CAP: u64 = 1 << 28;

/// Sum intervals closer than this fraction of the hull length are merged.
pub const MERGE_RTOL: f64 = 1e-12;

const CHUNK: usize = 256;

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::invalid(format!("[{lo}, {hi}] is not an interval")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn ordered(a: f64, b: f64) -> Self {
        Interval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Sorted, pairwise disjoint closed intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion::default()
    }

    pub fn single(lo: f64, hi: f64) -> Result<Self> {
        Ok(IntervalUnion {
            intervals: vec![Interval::new(lo, hi)?],
        })
    }

    /// Canonicalises arbitrary intervals: sorts and merges those whose gap is `≤ merge_tol`.
    pub fn from_intervals(mut ivs: Vec<Interval>, merge_tol: f64) -> Self {
        ivs.sort_unstable_by(|a, b| a.lo.total_cmp(&b.lo));
        IntervalUnion {
            intervals: merge_sorted(ivs.into_iter(), merge_tol),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn hull(&self) -> Option<Interval> {
        Some(Interval {
            lo: self.intervals.first()?.lo,
            hi: self.intervals.last()?.hi,
        })
    }

    /// Bounded gaps between consecutive intervals.
    pub fn gaps(&self) -> Vec<Interval> {
        self.intervals
            .windows(2)
            .map(|w| Interval {
                lo: w[0].hi,
                hi: w[1].lo,
            })
            .collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        let k = self.intervals.partition_point(|iv| iv.hi < x);
        self.intervals.get(k).is_some_and(|iv| iv.contains(x))
    }

    /// Every interval of `other` lies inside some interval of `self` (up to `tol`).
    pub fn contains_union(&self, other: &IntervalUnion, tol: f64) -> bool {
        other.intervals.iter().all(|iv| {
            let k = self.intervals.partition_point(|s| s.hi + tol < iv.hi);
            self.intervals
                .get(k)
                .is_some_and(|s| s.lo - tol <= iv.lo && iv.hi <= s.hi + tol)
        })
    }

    pub fn union(&self, other: &IntervalUnion, merge_tol: f64) -> IntervalUnion {
        let (mut a, mut b) = (self.intervals.iter().peekable(), other.intervals.iter().peekable());
        let merged = std::iter::from_fn(|| match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => {
                if x.lo <= y.lo {
                    a.next().copied()
                } else {
                    b.next().copied()
                }
            }
            (Some(_), None) => a.next().copied(),
            (None, Some(_)) => b.next().copied(),
            (None, None) => None,
        });
        IntervalUnion {
            intervals: merge_sorted(merged, merge_tol),
        }
    }

    pub fn translate(&self, t: f64) -> IntervalUnion {
        IntervalUnion {
            intervals: self
                .intervals
                .iter()
                .map(|iv| Interval {
                    lo: iv.lo + t,
                    hi: iv.hi + t,
                })
                .collect(),
        }
    }

    /// CSV lines `l,r` in ascending order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for iv in &self.intervals {
            out.push_str(&format!("{},{}\n", iv.lo, iv.hi));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut ivs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::config(format!("line {}", lineno + 1), "expected `l,r`"))
            };
            let mut parts = line.split(',');
            let (l, r) = (parse(parts.next())?, parse(parts.next())?);
            if parts.next().is_some() {
                return Err(Error::config(format!("line {}", lineno + 1), "expected `l,r`"));
            }
            ivs.push(Interval::new(l, r).map_err(|e| Error::config(format!("line {}", lineno + 1), e.to_string()))?);
        }
        Ok(IntervalUnion::from_intervals(ivs, 0.0))
    }
}

fn merge_sorted(ivs: impl Iterator<Item = Interval>, tol: f64) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::new();
    for iv in ivs {
        match out.last_mut() {
            Some(last) if iv.lo - last.hi <= tol => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// `A + B = {a + b}` with the default pair cap.
pub fn minkowski_sum(a: &IntervalUnion, b: &IntervalUnion) -> Result<IntervalUnion> {
    minkowski_sum_with_cap(a, b, DEFAULT_PAIR_CAP)
}

pub fn minkowski_sum_with_cap(a: &IntervalUnion, b: &IntervalUnion, pair_cap: u64) -> Result<IntervalUnion> {
    let (ha, hb) = match (a.hull(), b.hull()) {
        (Some(ha), Some(hb)) => (ha, hb),
        _ => return Err(Error::invalid("Minkowski sum of an empty union")),
    };
    let pairs = a.len() as u128 * b.len() as u128;
    if pairs > pair_cap as u128 {
        return Err(Error::CapExceeded {
            what: "interval pairs",
            requested: pairs,
            cap: pair_cap as u128,
        });
    }
    let tol = MERGE_RTOL * (ha.len() + hb.len());
    // Fixed chunking and an in-order fold keep the result independent of the thread count.
    let partial: Vec<IntervalUnion> = a
        .intervals
        .par_chunks(CHUNK)
        .map(|chunk| {
            let sums = chunk
                .iter()
                .flat_map(|x| {
                    b.intervals.iter().map(move |y| Interval {
                        lo: x.lo + y.lo,
                        hi: x.hi + y.hi,
                    })
                })
                .collect();
            IntervalUnion::from_intervals(sums, tol)
        })
        .collect();
    Ok(partial.iter().fold(IntervalUnion::empty(), |acc, u| acc.union(u, tol)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn u(ivs: &[(f64, f64)]) -> IntervalUnion {
        IntervalUnion::from_intervals(ivs.iter().map(|&(l, h)| Interval::new(l, h).unwrap()).collect(), 0.0)
    }

    #[test]
    fn sum_examples() {
        assert_eq!(
            minkowski_sum(&u(&[(0.0, 1.0)]), &u(&[(0.0, 1.0)])).unwrap(),
            u(&[(0.0, 2.0)])
        );
        assert_eq!(
            minkowski_sum(&u(&[(0.5, 0.5)]), &u(&[(0.25, 0.75)])).unwrap(),
            u(&[(0.75, 1.25)])
        );
        let s = minkowski_sum(&u(&[(0.0, 0.1), (0.9, 1.0)]), &u(&[(0.0, 0.1), (0.9, 1.0)])).unwrap();
        let expected = [(0.0, 0.2), (0.9, 1.1), (1.8, 2.0)];
        assert_eq!(s.len(), 3);
        for (iv, (l, h)) in s.intervals().iter().zip(expected) {
            assert!((iv.lo - l).abs() < 1e-15 && (iv.hi - h).abs() < 1e-15);
        }
    }

    #[test]
    fn sum_errors() {
        assert!(minkowski_sum(&IntervalUnion::empty(), &u(&[(0.0, 1.0)])).is_err());
        let a = u(&[(0.0, 0.1), (0.2, 0.3), (0.4, 0.5)]);
        assert!(matches!(
            minkowski_sum_with_cap(&a, &a, 8),
            Err(Error::CapExceeded { requested: 9, .. })
        ));
    }

    #[test]
    fn measure_examples() {
        assert!((u(&[(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)]).measure() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(IntervalUnion::empty().measure(), 0.0);
    }

    #[test]
    fn touching_intervals_merge() {
        assert_eq!(u(&[(0.0, 0.5), (0.5, 1.0)]).len(), 1);
        assert!(!u(&[(0.0, 0.5), (0.6, 1.0)]).contains(0.55));
        assert!(u(&[(0.0, 0.5), (0.6, 1.0)]).contains(0.6));
    }

    #[test]
    fn csv_roundtrip() {
        let a = u(&[(0.0, 0.125), (0.5, 0.75)]);
        assert_eq!(a.to_csv(), "0,0.125\n0.5,0.75\n");
        assert_eq!(IntervalUnion::from_csv(&a.to_csv()).unwrap(), a);
        assert!(IntervalUnion::from_csv("0,1,2\n").is_err());
    }

    fn arb_union() -> impl Strategy<Value = IntervalUnion> {
        // Dyadic endpoints keep sums exact.
        proptest::collection::vec((0u32..64, 0u32..8), 1..8).prop_map(|v| {
            u(&v.into_iter()
                .map(|(l, w)| (l as f64 / 64.0, (l + w) as f64 / 64.0))
                .collect::<Vec<_>>())
        })
    }

    proptest! {
        #[test]
        fn sum_properties(a in arb_union(), b in arb_union(), c in arb_union()) {
            let ab = minkowski_sum(&a, &b).unwrap();
            prop_assert_eq!(&ab, &minkowski_sum(&b, &a).unwrap());
            prop_assert_eq!(
                minkowski_sum(&ab, &c).unwrap(),
                minkowski_sum(&a, &minkowski_sum(&b, &c).unwrap()).unwrap()
            );
            prop_assert!(ab.measure() >= a.measure() - 1e-12);
            prop_assert!(ab.measure() >= b.measure() - 1e-12);
            let (h, ha, hb) = (ab.hull().unwrap(), a.hull().unwrap(), b.hull().unwrap());
            prop_assert_eq!(h.lo, ha.lo + hb.lo);
            prop_assert_eq!(h.hi, ha.hi + hb.hi);
            for w in ab.intervals().windows(2) {
                prop_assert!(w[0].hi < w[1].lo);
            }
        }
    }
}
