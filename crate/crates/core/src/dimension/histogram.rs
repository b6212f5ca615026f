use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::BernoulliWeights;
use crate::error::{Error, Result};
use crate::geometry::Interval;
use crate::ifs::Ifs;

/// Masses on the bins `[origin + k·w, origin + (k+1)·w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureHistogram {
    pub bin_width: f64,
    pub origin: f64,
    pub weights: Vec<f64>,
}

impl MeasureHistogram {
    pub fn new(bin_width: f64, origin: f64, weights: Vec<f64>) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::invalid(format!("bin width {bin_width} must be positive")));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("histogram masses must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("histogram mass is {total}, not 1")));
        }
        Ok(MeasureHistogram {
            bin_width,
            origin,
            weights,
        })
    }

    /// Lebesgue measure on `[0, 1]` discretised into `bins` bins.
    pub fn uniform(bins: usize) -> Result<Self> {
        MeasureHistogram::new(1.0 / bins as f64, 0.0, vec![1.0 / bins as f64; bins])
    }

    /// A unit mass at `x`, centred in its bin.
    pub fn dirac(x: f64, bin_width: f64) -> Result<Self> {
        MeasureHistogram::new(bin_width, x - 0.5 * bin_width, vec![1.0])
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        self.origin + (k as f64 + 0.5) * self.bin_width
    }

    pub fn density(&self, k: usize) -> f64 {
        self.weights[k] / self.bin_width
    }

    /// `‖mass / bin_width‖_{L²}`.
    pub fn l2_norm(&self) -> f64 {
        (self.weights.iter().map(|w| w * w).sum::<f64>() / self.bin_width).sqrt()
    }

    /// Smallest interval containing every nonzero bin.
    pub fn support_hull(&self) -> Option<Interval> {
        let first = self.weights.iter().position(|&w| w > 0.0)?;
        let last = self.weights.iter().rposition(|&w| w > 0.0)?;
        Some(Interval {
            lo: self.origin + first as f64 * self.bin_width,
            hi: self.origin + (last + 1) as f64 * self.bin_width,
        })
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut cdf = Vec::with_capacity(self.weights.len() + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in &self.weights {
            acc += w;
            cdf.push(acc);
        }
        cdf
    }

    fn cdf_at(&self, cdf: &[f64], x: f64) -> f64 {
        let t = (x - self.origin) / self.bin_width;
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.weights.len();
        if t >= n as f64 {
            return cdf[n];
        }
        let k = t.floor() as usize;
        cdf[k] + (t - k as f64) * self.weights[k]
    }

    /// Mass of `[x - r, x + r]`, spreading each bin's mass uniformly over the bin.
    pub fn ball_mass(&self, x: f64, r: f64) -> f64 {
        let cdf = self.cumulative();
        self.cdf_at(&cdf, x + r) - self.cdf_at(&cdf, x - r)
    }

    /// CSV lines `bin_index,mass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, w) in self.weights.iter().enumerate() {
            out.push_str(&format!("{k},{w}\n"));
        }
        out
    }

    pub fn from_csv(text: &str, origin: f64, bin_width: f64) -> Result<Self> {
        let mut weights: Vec<f64> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::config(format!("line {}", lineno + 1), "expected `bin_index,mass`");
            let (idx, mass) = line.split_once(',').ok_or_else(bad)?;
            let idx: usize = idx.trim().parse().map_err(|_| bad())?;
            let mass: f64 = mass.trim().parse().map_err(|_| bad())?;
            if weights.len() <= idx {
                weights.resize(idx + 1, 0.0);
            }
            weights[idx] += mass;
        }
        MeasureHistogram::new(bin_width, origin, weights)
    }
}

/// Discretises `Π(μ)` for the Bernoulli measure `w` at cylinder depth `depth`.
pub fn pushforward_histogram(
    ifs: &Ifs,
    w: &BernoulliWeights,
    depth: usize,
    bin_width: f64,
    cap: u64,
) -> Result<MeasureHistogram> {
    if w.len() != ifs.len() {
        return Err(Error::invalid("weights and IFS have different alphabet sizes"));
    }
    if !(bin_width > 0.0) {
        return Err(Error::invalid("bin width must be positive"));
    }
    let cylinders = ifs.cylinder_intervals(depth, cap)?;
    let longest = cylinders.iter().map(Interval::len).fold(0.0, f64::max);
    if longest > bin_width * (1.0 + 1e-9) {
        return Err(Error::ResolutionMismatch {
            cylinder: longest,
            bin_width,
        });
    }
    let mut masses = vec![1.0];
    for _ in 0..depth {
        masses = w
            .probs()
            .iter()
            .flat_map(|&p| masses.iter().map(move |&m| p * m))
            .collect();
    }
    let bins = ((1.0 / bin_width) - 1e-12).ceil().max(1.0) as usize;
    let mut weights = vec![0.0; bins];
    for (iv, m) in cylinders.iter().zip(&masses) {
        let k = ((iv.midpoint() / bin_width).floor().max(0.0) as usize).min(bins - 1);
        weights[k] += m;
    }
    MeasureHistogram::new(bin_width, 0.0, weights)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvolutionResult {
    pub histogram: MeasureHistogram,
    pub l2_norm: f64,
}

/// `h1 ∗ h2` on the common bin grid.
///
/// Masses sit at bin centres, so the output origin is `o1 + o2 + w/2`.
pub fn convolution_density(h1: &MeasureHistogram, h2: &MeasureHistogram) -> Result<ConvolutionResult> {
    let w = h1.bin_width;
    if (h2.bin_width - w).abs() > 1e-12 * w {
        return Err(Error::BinMismatch(w, h2.bin_width));
    }
    let (a, b) = (&h1.weights, &h2.weights);
    let n = a.len() + b.len() - 1;
    let weights: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let lo = k.saturating_sub(b.len() - 1);
            let hi = k.min(a.len() - 1);
            (lo..=hi).map(|i| a[i] * b[k - i]).sum()
        })
        .collect();
    let histogram = MeasureHistogram {
        bin_width: w,
        origin: h1.origin + h2.origin + 0.5 * w,
        weights,
    };
    let l2_norm = histogram.l2_norm();
    Ok(ConvolutionResult { histogram, l2_norm })
}

/// Outcome of checking `η[B_r(x)] ≤ C·r^d` on a sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrostmanCertificate {
    pub d: f64,
    pub c: f64,
    pub worst_ratio: f64,
    pub worst_x: f64,
    pub worst_r: f64,
    pub samples: usize,
    pub pass: bool,
}

pub fn frostman_check(hist: &MeasureHistogram, d: f64, c: f64, samples: &[(f64, f64)]) -> Result<FrostmanCertificate> {
    if let Some(&(_, r)) = samples.iter().find(|&&(_, r)| r < 2.0 * hist.bin_width) {
        return Err(Error::ResolutionTooCoarse {
            radius: r,
            bin_width: hist.bin_width,
        });
    }
    let cdf = hist.cumulative();
    let mut worst = (0.0f64, f64::NAN, f64::NAN);
    for &(x, r) in samples {
        let mass = hist.cdf_at(&cdf, x + r) - hist.cdf_at(&cdf, x - r);
        let ratio = mass / r.powf(d);
        if ratio > worst.0 || worst.1.is_nan() {
            worst = (ratio, x, r);
        }
    }
    Ok(FrostmanCertificate {
        d,
        c,
        worst_ratio: worst.0,
        worst_x: worst.1,
        worst_r: worst.2,
        samples: samples.len(),
        pass: worst.0 <= c,
    })
}

/// `x_points` centres spread over the support and `radii` geometric radii from `2·bin_width`
/// up to the support length.
pub fn frostman_grid(hist: &MeasureHistogram, x_points: usize, radii: usize) -> Vec<(f64, f64)> {
    let Some(hull) = hist.support_hull() else {
        return Vec::new();
    };
    let r_min = 2.0 * hist.bin_width;
    let r_max = hull.len().max(r_min);
    let rs: Vec<f64> = (0..radii.max(1))
        .map(|k| {
            if radii <= 1 {
                r_min
            } else {
                r_min * (r_max / r_min).powf(k as f64 / (radii - 1) as f64)
            }
        })
        .collect();
    let xs: Vec<f64> = (0..x_points.max(1))
        .map(|i| hull.lo + hull.len() * (i as f64 + 0.5) / x_points.max(1) as f64)
        .collect();
    xs.iter().flat_map(|&x| rs.iter().map(move |&r| (x, r))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::DEFAULT_CYLINDER_CAP;

    fn third() -> Ifs {
        Ifs::middle_alpha(1.0 / 3.0).unwrap()
    }

    #[test]
    fn pushforward_examples() {
        let h = pushforward_histogram(
            &third(),
            &BernoulliWeights::uniform(2).unwrap(),
            1,
            0.5,
            DEFAULT_CYLINDER_CAP,
        )
        .unwrap();
        assert_eq!(h.weights, vec![0.5, 0.5]);

        let h = pushforward_histogram(
            &third(),
            &BernoulliWeights::uniform(2).unwrap(),
            10,
            0.01,
            DEFAULT_CYLINDER_CAP,
        )
        .unwrap();
        assert_eq!(h.weights.len(), 100);
        assert!((h.total_mass() - 1.0).abs() < 1e-12);
        // Every nonzero bin meets the depth-10 cover.
        let cover = third().generation_cover(10, DEFAULT_CYLINDER_CAP).unwrap();
        for (k, &m) in h.weights.iter().enumerate() {
            if m > 0.0 {
                let (lo, hi) = (k as f64 * 0.01, (k + 1) as f64 * 0.01);
                assert!(cover.intervals().iter().any(|iv| iv.hi >= lo && iv.lo <= hi));
            }
        }

        let h = pushforward_histogram(
            &third(),
            &BernoulliWeights::new(vec![1.0, 0.0]).unwrap(),
            6,
            0.01,
            DEFAULT_CYLINDER_CAP,
        )
        .unwrap();
        assert_eq!(h.weights[0], 1.0);

        assert!(matches!(
            pushforward_histogram(
                &third(),
                &BernoulliWeights::uniform(2).unwrap(),
                2,
                0.05,
                DEFAULT_CYLINDER_CAP
            ),
            Err(Error::ResolutionMismatch { .. })
        ));
    }

    #[test]
    fn convolution_identity_and_triangle() {
        let w = 1.0 / 256.0;
        let h = pushforward_histogram(
            &third(),
            &BernoulliWeights::uniform(2).unwrap(),
            8,
            w,
            DEFAULT_CYLINDER_CAP,
        )
        .unwrap();
        let r = convolution_density(&MeasureHistogram::dirac(0.0, w).unwrap(), &h).unwrap();
        assert_eq!(r.histogram.weights, h.weights);
        assert!((r.histogram.origin - h.origin).abs() < 1e-15);

        let u = MeasureHistogram::uniform(256).unwrap();
        let r = convolution_density(&u, &u).unwrap();
        assert!((r.histogram.total_mass() - 1.0).abs() < 1e-12);
        let mut sup_err = 0.0f64;
        for k in 0..r.histogram.weights.len() {
            let x = r.histogram.bin_center(k);
            let tri = if x <= 1.0 { x } else { 2.0 - x };
            sup_err = sup_err.max((r.histogram.density(k) - tri).abs());
        }
        assert!(sup_err < 2.0 * w);
        // Support hull is the sum of hulls.
        let hull = r.histogram.support_hull().unwrap();
        assert!((hull.lo - 0.5 * w).abs() < 1e-12 && (hull.hi - (2.0 - 0.5 * w)).abs() < 1e-12);

        assert!(matches!(
            convolution_density(&u, &MeasureHistogram::uniform(128).unwrap()),
            Err(Error::BinMismatch(..))
        ));
    }

    #[test]
    fn frostman_examples() {
        let u = MeasureHistogram::uniform(1000).unwrap();
        let grid = frostman_grid(&u, 50, 12);
        let cert = frostman_check(&u, 1.0, 2.01, &grid).unwrap();
        assert!(cert.pass, "{cert:?}");

        let w = 3f64.powi(-10);
        let h = pushforward_histogram(
            &third(),
            &BernoulliWeights::uniform(2).unwrap(),
            10,
            w,
            DEFAULT_CYLINDER_CAP,
        )
        .unwrap();
        let d = 2f64.ln() / 3f64.ln();
        let grid = frostman_grid(&h, 729, 16);
        let cert = frostman_check(&h, d, 4.0, &grid).unwrap();
        assert!(cert.pass, "{cert:?}");
        let cert = frostman_check(&h, 0.8, 4.0, &grid).unwrap();
        assert!(!cert.pass, "{cert:?}");

        assert!(matches!(
            frostman_check(&h, d, 4.0, &[(0.5, w)]),
            Err(Error::ResolutionTooCoarse { .. })
        ));
    }

    #[test]
    fn frostman_monotone_in_c() {
        let h = pushforward_histogram(
            &third(),
            &BernoulliWeights::uniform(2).unwrap(),
            8,
            1.0 / 4096.0,
            DEFAULT_CYLINDER_CAP,
        )
        .unwrap();
        let grid = frostman_grid(&h, 64, 8);
        let mut passed = false;
        for c in [0.5, 1.0, 1.5, 2.0, 3.0, 5.0] {
            let p = frostman_check(&h, 0.63, c, &grid).unwrap().pass;
            assert!(!passed || p);
            passed |= p;
        }
        assert!(passed);
    }

    #[test]
    fn histogram_csv() {
        let h = MeasureHistogram::new(0.5, 0.0, vec![0.25, 0.75]).unwrap();
        assert_eq!(h.to_csv(), "0,0.25\n1,0.75\n");
        assert_eq!(MeasureHistogram::from_csv(&h.to_csv(), 0.0, 0.5).unwrap(), h);
        assert!(MeasureHistogram::from_csv("0;1\n", 0.0, 0.5).is_err());
    }
}
