//! JSON configuration: one document with `ifs`, `family`, `compact_set`, `measure`, `verify`
//! and `sweep` sections. Unknown keys are rejected and validation errors name the field.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dimension::{
    equilibrium_weights, frostman_check, frostman_grid, moran_dimension, pushforward_histogram, BernoulliWeights,
    MeasureHistogram,
};
use crate::error::{Error, Result};
use crate::geometry::{CoverSource, Interval, IntervalUnion};
use crate::ifs::{AffineMap, CantorFamily, CoefficientFn, FamilyMap, Ifs, IfsMap, ParamInterval, Perturbation};
use crate::sweep::SweepSpec;
use crate::symbolic::DEFAULT_CYLINDER_CAP;
use crate::transversality::{EtaCertificate, VerifySettings};

const DEFAULT_BIN_WIDTH: f64 = 1.0 / 4096.0;
const FROSTMAN_CENTRES: usize = 512;
const FROSTMAN_RADII: usize = 16;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub ifs: Option<IfsSpec>,
    pub family: Option<FamilySpec>,
    pub compact_set: Option<CompactSetSpec>,
    pub measure: Option<MeasureSpec>,
    pub verify: Option<VerifySettings>,
    pub sweep: Option<SweepSpec>,
    pub seed: Option<u64>,
}

/// One map `c·x + b (+ g)` of a fixed system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub c: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Perturbation>,
}

/// Either `{"middle_alpha": a}` or `{"maps": [...]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsSpec {
    pub middle_alpha: Option<f64>,
    pub maps: Option<Vec<MapSpec>>,
    /// Parameter value passed to perturbation terms that depend on `λ`.
    #[serde(default)]
    pub lambda: f64,
}

/// A coefficient given as a number or as a full expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Constant(f64),
    Expr(CoefficientFn),
}

impl CoefficientSpec {
    fn build(&self) -> CoefficientFn {
        match self {
            CoefficientSpec::Constant(v) => CoefficientFn::constant(*v),
            CoefficientSpec::Expr(e) => e.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyMapSpec {
    pub c: CoefficientSpec,
    pub b: CoefficientSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Perturbation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    /// `[lo, hi]`.
    pub j: [f64; 2],
    pub delta: f64,
    pub maps: Vec<FamilyMapSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramFile {
    pub path: String,
    #[serde(default)]
    pub origin: f64,
    pub bin_width: f64,
}

/// The set `K` and its measure `η`. Exactly one source is given.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactSetSpec {
    pub middle_alpha: Option<f64>,
    pub maps: Option<Vec<MapSpec>>,
    /// `K = C_λ` of the configured family.
    pub family_lambda: Option<f64>,
    /// A fixed union of intervals `[[l, r], ...]`.
    pub intervals: Option<Vec<[f64; 2]>>,
    pub lebesgue: Option<bool>,
    pub histogram: Option<HistogramFile>,
    /// Frostman exponent; defaults to the similarity dimension for self-similar `K`.
    pub d: Option<f64>,
    /// Frostman constant to certify on a histogram of `η`.
    pub frostman_c: Option<f64>,
    pub bin_width: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    /// Bernoulli weights; the measure of maximal dimension when absent.
    pub weights: Option<Vec<f64>>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::config(format!("line {} column {}", e.line(), e.column()), e.to_string())
}

fn build_maps(maps: &[MapSpec], lambda: f64, section: &str) -> Result<Ifs> {
    let built = maps
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let affine =
                AffineMap::new(m.c, m.b).map_err(|e| Error::config(format!("{section}.maps[{i}].c"), e.to_string()))?;
            match &m.g {
                None => Ok(IfsMap {
                    affine,
                    perturbation: None,
                    lambda,
                }),
                Some(g) => IfsMap::perturbed(affine, g.clone(), lambda)
                    .map_err(|e| Error::config(format!("{section}.maps[{i}].g"), e.to_string())),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let ifs = Ifs::new(built).map_err(|e| Error::config(format!("{section}.maps"), e.to_string()))?;
    let sep = ifs.validate_separation();
    if let Some((i, j)) = sep.offending {
        return Err(Error::config(
            format!("{section}.maps"),
            format!("images of maps {i} and {j} are not separated"),
        ));
    }
    Ok(ifs)
}

fn middle_alpha(a: f64, field: &str) -> Result<Ifs> {
    if !(a > 0.0 && a < 0.5) {
        return Err(Error::config(field, format!("ratio must lie in (0, 1/2), got {a}")));
    }
    Ifs::middle_alpha(a).map_err(|e| Error::config(field, e.to_string()))
}

impl IfsSpec {
    pub fn build(&self, section: &str) -> Result<Ifs> {
        match (&self.middle_alpha, &self.maps) {
            (Some(a), None) => middle_alpha(*a, &format!("{section}.middle_alpha")),
            (None, Some(maps)) => build_maps(maps, self.lambda, section),
            _ => Err(Error::config(section, "give exactly one of `middle_alpha` or `maps`")),
        }
    }
}

impl FamilySpec {
    pub fn build(&self) -> Result<CantorFamily> {
        let j = ParamInterval::new(self.j[0], self.j[1]).map_err(|e| Error::config("family.j", e.to_string()))?;
        if !(self.delta > 0.0) {
            return Err(Error::config("family.delta", "must be positive"));
        }
        if self.maps.len() < 2 {
            return Err(Error::config("family.maps", "need at least two maps"));
        }
        let maps = self
            .maps
            .iter()
            .map(|m| FamilyMap {
                c: m.c.build(),
                b: m.b.build(),
                g: m.g.clone(),
            })
            .collect();
        let fam = CantorFamily::new(j, maps, self.delta).map_err(|e| Error::config("family", e.to_string()))?;
        for (i, m) in fam.maps.iter().enumerate() {
            for l in j.grid(33) {
                let c = m.c.value(l);
                if !(c != 0.0 && c.abs() < 1.0) {
                    return Err(Error::config(
                        format!("family.maps[{i}].c"),
                        format!("|c({l})| = {} is not in (0, 1)", c.abs()),
                    ));
                }
            }
        }
        fam.check_derivatives(65)?;
        Ok(fam)
    }
}

impl CompactSetSpec {
    fn sources(&self) -> usize {
        [
            self.middle_alpha.is_some(),
            self.maps.is_some(),
            self.family_lambda.is_some(),
            self.intervals.is_some(),
            self.lebesgue == Some(true),
            self.histogram.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count()
    }

    fn check_single(&self) -> Result<()> {
        if self.sources() != 1 {
            return Err(Error::config(
                "compact_set",
                "give exactly one of `middle_alpha`, `maps`, `family_lambda`, `intervals`, `lebesgue`, `histogram`",
            ));
        }
        Ok(())
    }

    /// `K` as an IFS, when it is one.
    pub fn ifs(&self, family: Option<&CantorFamily>) -> Result<Option<Ifs>> {
        self.check_single()?;
        if let Some(a) = self.middle_alpha {
            return middle_alpha(a, "compact_set.middle_alpha").map(Some);
        }
        if let Some(maps) = &self.maps {
            return build_maps(maps, 0.0, "compact_set").map(Some);
        }
        if let Some(l) = self.family_lambda {
            let fam = family.ok_or_else(|| Error::config("compact_set.family_lambda", "needs a `family` section"))?;
            return fam
                .family_at(l)
                .map(Some)
                .map_err(|e| Error::config("compact_set.family_lambda", e.to_string()));
        }
        Ok(None)
    }

    /// `K` as a summand of a Minkowski sum.
    pub fn cover_source(&self, family: Option<&CantorFamily>) -> Result<CoverSource> {
        if let Some(ifs) = self.ifs(family)? {
            return Ok(CoverSource::Ifs(ifs));
        }
        if let Some(ivs) = &self.intervals {
            let ivs = ivs
                .iter()
                .enumerate()
                .map(|(i, &[l, r])| {
                    Interval::new(l, r).map_err(|e| Error::config(format!("compact_set.intervals[{i}]"), e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(CoverSource::Fixed(IntervalUnion::from_intervals(ivs, 0.0)));
        }
        if self.lebesgue == Some(true) {
            return Ok(CoverSource::Fixed(IntervalUnion::single(0.0, 1.0)?));
        }
        Err(Error::config("compact_set", "a histogram cannot be used as a summand"))
    }

    /// The measure `η` on `K` with its Frostman exponent, certified when `frostman_c` is set.
    pub fn eta(&self, family: Option<&CantorFamily>, base: &Path) -> Result<EtaCertificate> {
        self.check_single()?;
        if self.lebesgue == Some(true) {
            return Ok(EtaCertificate {
                d: self.d.unwrap_or(1.0),
                frostman: None,
            });
        }
        let bin_width = self.bin_width.unwrap_or(DEFAULT_BIN_WIDTH);
        if !(bin_width > 0.0 && bin_width < 1.0) {
            return Err(Error::config("compact_set.bin_width", "must lie in (0, 1)"));
        }
        let (hist, d) = if let Some(h) = &self.histogram {
            let d = self
                .d
                .ok_or_else(|| Error::config("compact_set.d", "required with a histogram"))?;
            let path = base.join(&h.path);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::config("compact_set.histogram.path", format!("{}: {e}", path.display())))?;
            (MeasureHistogram::from_csv(&text, h.origin, h.bin_width)?, d)
        } else if let Some(ifs) = self.ifs(family)? {
            let ratios = ifs.ratios();
            let d = match self.d {
                Some(d) => d,
                None if ifs.is_affine() => moran_dimension(&ratios)?,
                None => return Err(Error::config("compact_set.d", "required for a perturbed system")),
            };
            if self.frostman_c.is_none() {
                return Ok(EtaCertificate { d, frostman: None });
            }
            let w = equilibrium_weights(&ratios)?;
            let rmax = ratios.iter().copied().fold(0.0, f64::max);
            let depth = (bin_width.ln() / rmax.ln()).ceil().max(1.0) as usize;
            (
                pushforward_histogram(&ifs, &w, depth, bin_width, DEFAULT_CYLINDER_CAP)?,
                d,
            )
        } else {
            return Err(Error::config(
                "compact_set",
                "intervals carry no measure; use `lebesgue` or `histogram`",
            ));
        };
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::config("compact_set.d", format!("must lie in (0, 1], got {d}")));
        }
        let frostman = match self.frostman_c {
            Some(c) => Some(frostman_check(
                &hist,
                d,
                c,
                &frostman_grid(&hist, FROSTMAN_CENTRES, FROSTMAN_RADII),
            )?),
            None => None,
        };
        Ok(EtaCertificate { d, frostman })
    }
}

impl MeasureSpec {
    pub fn weights(&self, ifs: &Ifs) -> Result<BernoulliWeights> {
        match &self.weights {
            Some(p) => {
                if p.len() != ifs.len() {
                    return Err(Error::config(
                        "measure.weights",
                        format!("{} weights for {} maps", p.len(), ifs.len()),
                    ));
                }
                BernoulliWeights::new(p.clone()).map_err(|e| Error::config("measure.weights", e.to_string()))
            }
            None => equilibrium_weights(&ifs.ratios()),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config> {
        let cfg: Config = serde_json::from_str(text).map_err(parse_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Config> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        Config::from_json(&text)
    }

    /// Checks every section that is present.
    pub fn validate(&self) -> Result<()> {
        if let Some(ifs) = &self.ifs {
            ifs.build("ifs")?;
        }
        let family = self.family.as_ref().map(FamilySpec::build).transpose()?;
        if let Some(k) = &self.compact_set {
            k.check_single()?;
            if k.family_lambda.is_some() {
                k.ifs(family.as_ref())?;
            }
        }
        if let (Some(m), Some(ifs)) = (&self.measure, &self.ifs) {
            m.weights(&ifs.build("ifs")?)?;
        }
        if let Some(v) = &self.verify {
            v.validate()?;
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        Ok(())
    }

    pub fn ifs(&self) -> Result<Ifs> {
        self.ifs
            .as_ref()
            .ok_or_else(|| Error::config("ifs", "section missing"))?
            .build("ifs")
    }

    pub fn family(&self) -> Result<CantorFamily> {
        self.family
            .as_ref()
            .ok_or_else(|| Error::config("family", "section missing"))?
            .build()
    }

    pub fn compact_set(&self) -> Result<&CompactSetSpec> {
        self.compact_set
            .as_ref()
            .ok_or_else(|| Error::config("compact_set", "section missing"))
    }

    pub fn weights(&self, ifs: &Ifs) -> Result<BernoulliWeights> {
        self.measure.clone().unwrap_or_default().weights(ifs)
    }

    /// Verification settings with the document-wide seed applied.
    pub fn verify_settings(&self) -> VerifySettings {
        let mut v = self.verify.clone().unwrap_or_default();
        if let Some(s) = self.seed {
            v.seed = s;
        }
        v
    }
}
