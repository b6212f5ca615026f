use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::IntervalUnion;
use crate::ifs::Ifs;

const EDGE_EPS: f64 = 1e-6;
/// Extra slack proportional to the cell index, for rounding in positions far from 0.
const INDEX_RTOL: f64 = 1e-12;

/// A cover of the set at one depth, together with the box size it is counted at.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverLevel {
    pub depth: usize,
    pub cover: IntervalUnion,
    pub mesh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDimension {
    pub slope: f64,
    pub intercept: f64,
    /// `(ln(1/mesh), ln count)` per level.
    pub points: Vec<(f64, f64)>,
    pub residuals: Vec<f64>,
}

/// Number of mesh cells `[jδ, (j+1)δ]` meeting the union; cells touched only at an edge do
/// not count.
pub fn box_count(u: &IntervalUnion, mesh: f64) -> usize {
    let mut count = 0usize;
    let mut last: Option<i64> = None;
    for iv in u.intervals() {
        let (lo, hi) = (iv.lo / mesh, iv.hi / mesh);
        let first = (lo + EDGE_EPS + lo.abs() * INDEX_RTOL).floor() as i64;
        let end = ((hi - EDGE_EPS - hi.abs() * INDEX_RTOL).ceil() as i64 - 1).max(first);
        let start = match last {
            Some(l) if l >= first => l + 1,
            _ => first,
        };
        if end >= start {
            count += (end - start + 1) as usize;
            last = Some(end);
        }
    }
    count
}

/// Least-squares slope of `ln N(δ)` against `ln(1/δ)`.
pub fn box_dimension_estimate(levels: &[CoverLevel]) -> Result<BoxDimension> {
    if levels.len() < 3 {
        return Err(Error::DegenerateFit("at least three depths are needed".into()));
    }
    if levels.windows(2).any(|w| !(w[1].mesh < w[0].mesh)) || levels.iter().any(|l| !(l.mesh > 0.0)) {
        return Err(Error::DegenerateFit(
            "mesh must be positive and strictly decreasing".into(),
        ));
    }
    let points: Vec<(f64, f64)> = levels
        .iter()
        .map(|l| ((1.0 / l.mesh).ln(), (box_count(&l.cover, l.mesh).max(1) as f64).ln()))
        .collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = points.iter().map(|p| p.1 - (intercept + slope * p.0)).collect();
    Ok(BoxDimension {
        slope,
        intercept,
        points,
        residuals,
    })
}

/// Generation covers of `ifs`, each counted at its longest cylinder length. For affine maps that
/// length is `max ratio ^ depth`; measuring it as `hi - lo` near 1 loses about ten digits.
pub fn ifs_cover_levels(ifs: &Ifs, depths: std::ops::RangeInclusive<usize>, cap: u64) -> Result<Vec<CoverLevel>> {
    depths
        .map(|depth| {
            let cyl = ifs.cylinder_intervals(depth, cap)?;
            let mesh = if ifs.is_affine() {
                ifs.ratios().iter().copied().fold(0.0, f64::max).powi(depth as i32)
            } else {
                cyl.iter().map(|iv| iv.len()).fold(0.0, f64::max)
            };
            Ok(CoverLevel {
                depth,
                cover: IntervalUnion::from_intervals(cyl, 0.0),
                mesh,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::DEFAULT_CYLINDER_CAP;

    #[test]
    fn middle_third() {
        let levels = ifs_cover_levels(&Ifs::middle_alpha(1.0 / 3.0).unwrap(), 2..=8, DEFAULT_CYLINDER_CAP).unwrap();
        for l in &levels {
            assert_eq!(box_count(&l.cover, l.mesh), 1 << l.depth);
        }
        let est = box_dimension_estimate(&levels).unwrap();
        assert!((est.slope - 2f64.ln() / 3f64.ln()).abs() < 0.01);
        assert!(est.residuals.iter().all(|r| r.abs() < 1e-9));
    }

    #[test]
    fn point_and_interval() {
        let point: Vec<CoverLevel> = (1..=6)
            .map(|n| CoverLevel {
                depth: n,
                cover: IntervalUnion::single(0.3, 0.3).unwrap(),
                mesh: 0.5f64.powi(n as i32),
            })
            .collect();
        assert!(box_dimension_estimate(&point).unwrap().slope.abs() < 1e-12);
        let full: Vec<CoverLevel> = (1..=6)
            .map(|n| CoverLevel {
                depth: n,
                cover: IntervalUnion::single(0.0, 1.0).unwrap(),
                mesh: 0.5f64.powi(n as i32),
            })
            .collect();
        assert!((box_dimension_estimate(&full).unwrap().slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fits() {
        let flat: Vec<CoverLevel> = (1..=4)
            .map(|n| CoverLevel {
                depth: n,
                cover: IntervalUnion::single(0.0, 1.0).unwrap(),
                mesh: 0.5,
            })
            .collect();
        assert!(matches!(box_dimension_estimate(&flat), Err(Error::DegenerateFit(_))));
        assert!(matches!(
            box_dimension_estimate(&flat[..2]),
            Err(Error::DegenerateFit(_))
        ));
    }
}
