use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::moran::moran_dimension;
use crate::error::{Error, Result};
use crate::ifs::Ifs;

/// Product (Bernoulli) weights on the alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliWeights {
    p: Vec<f64>,
}

impl BernoulliWeights {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::invalid("weights need at least two symbols"));
        }
        if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(BernoulliWeights { p })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        BernoulliWeights::new(vec![1.0 / m as f64; m])
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.p).expect("validated weights")
    }
}

/// Weights `p_i = r_i^s` of the measure of maximal dimension of a self-similar set.
pub fn equilibrium_weights(ratios: &[f64]) -> Result<BernoulliWeights> {
    let s = moran_dimension(ratios)?;
    let raw: Vec<f64> = ratios.iter().map(|r| r.powf(s)).collect();
    let total: f64 = raw.iter().sum();
    BernoulliWeights::new(raw.into_iter().map(|x| x / total).collect())
}

/// Shannon entropy in nats.
pub fn entropy(w: &BernoulliWeights) -> f64 {
    -w.p.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

/// How many random words (and of what length) a Birkhoff average uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub words: usize,
    pub depth: usize,
    pub seed: u64,
}

impl Default for OrbitSample {
    fn default() -> Self {
        OrbitSample {
            words: 256,
            depth: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub std_error: f64,
    pub exact: bool,
}

/// Lyapunov exponent (nats) of the expanding map of `ifs` under the Bernoulli measure `w`.
pub fn lyapunov_exponent(ifs: &Ifs, w: &BernoulliWeights, sample: OrbitSample) -> Result<LyapunovEstimate> {
    if w.len() != ifs.len() {
        return Err(Error::invalid("weights and IFS have different alphabet sizes"));
    }
    if ifs.is_affine() {
        let value = -ifs.ratios().iter().zip(w.probs()).map(|(c, p)| p * c.ln()).sum::<f64>();
        return Ok(LyapunovEstimate {
            value,
            std_error: 0.0,
            exact: true,
        });
    }
    if sample.words < 2 || sample.depth == 0 {
        return Err(Error::invalid(
            "orbit sample needs at least two words of positive depth",
        ));
    }
    let dist = w.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(sample.seed);
    let mut averages = Vec::with_capacity(sample.words);
    for _ in 0..sample.words {
        let word: Vec<usize> = (0..sample.depth).map(|_| dist.sample(&mut rng)).collect();
        let mut x = 0.5;
        let mut acc = 0.0;
        for &s in word.iter().rev() {
            let map = &ifs.maps()[s];
            acc -= map.derivative(x).abs().ln();
            x = map.apply(x);
        }
        averages.push(acc / sample.depth as f64);
    }
    let n = averages.len() as f64;
    let mean = averages.iter().sum::<f64>() / n;
    let var = averages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(LyapunovEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{AffineMap, IfsMap, Perturbation};

    #[test]
    fn weights_validation() {
        assert!(BernoulliWeights::new(vec![0.5, 0.6]).is_err());
        assert!(BernoulliWeights::new(vec![-0.1, 1.1]).is_err());
        assert!(BernoulliWeights::new(vec![1.0, 0.0]).is_ok());
    }

    #[test]
    fn equilibrium_examples() {
        let w = equilibrium_weights(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((w.probs()[0] - 0.5).abs() < 1e-15);
        let w = equilibrium_weights(&[0.4, 0.4]).unwrap();
        assert!((w.probs()[1] - 0.5).abs() < 1e-15);
        let w = equilibrium_weights(&[0.5, 0.25]).unwrap();
        let x = (5f64.sqrt() - 1.0) / 2.0;
        assert!((w.probs()[0] - x).abs() < 1e-12);
        assert!((w.probs()[1] - (1.0 - x)).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&BernoulliWeights::uniform(2).unwrap()) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&BernoulliWeights::new(vec![1.0, 0.0]).unwrap()), 0.0);
        let x = (5f64.sqrt() - 1.0) / 2.0;
        let h = entropy(&BernoulliWeights::new(vec![x, 1.0 - x]).unwrap());
        assert!((h - 0.6650).abs() < 1e-4);
    }

    #[test]
    fn lyapunov_examples() {
        let third = Ifs::middle_alpha(1.0 / 3.0).unwrap();
        let l = lyapunov_exponent(
            &third,
            &BernoulliWeights::new(vec![0.2, 0.8]).unwrap(),
            OrbitSample::default(),
        )
        .unwrap();
        assert!((l.value - 3f64.ln()).abs() < 1e-15 && l.exact);

        let ifs = Ifs::from_affine(&[(0.5, 0.0), (0.25, 0.75)]).unwrap();
        let w = equilibrium_weights(&ifs.ratios()).unwrap();
        let l = lyapunov_exponent(&ifs, &w, OrbitSample::default()).unwrap();
        assert!((l.value - 0.9580).abs() < 1e-4);
        let ratio = entropy(&w) / l.value;
        assert!((ratio - moran_dimension(&ifs.ratios()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn birkhoff_estimate_close_to_affine_part() {
        let g = Perturbation::sine_bump(1e-3);
        let ifs = Ifs::new(vec![
            IfsMap::perturbed(AffineMap::new(0.4, 0.0).unwrap(), g.clone(), 0.0).unwrap(),
            IfsMap::perturbed(AffineMap::new(0.4, 0.6).unwrap(), g, 0.0).unwrap(),
        ])
        .unwrap();
        let w = BernoulliWeights::uniform(2).unwrap();
        let sample = OrbitSample {
            words: 400,
            depth: 64,
            seed: 7,
        };
        let l = lyapunov_exponent(&ifs, &w, sample).unwrap();
        assert!(!l.exact);
        assert!((l.value - 2.5f64.ln()).abs() < 0.02);
        assert!(l.std_error < 1e-2);
        // Same seed, same estimate.
        assert_eq!(l, lyapunov_exponent(&ifs, &w, sample).unwrap());
    }
}
