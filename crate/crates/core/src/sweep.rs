//! Deterministic parameter sweeps and the middle-α region map.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    middle_alpha_classify, sum_cover_analysis, CoverSource, RegionTag, RegionVerdict, DEFAULT_PAIR_CAP,
};
use crate::ifs::{CantorFamily, Ifs};
use crate::symbolic::DEFAULT_CYLINDER_CAP;
use crate::transversality::{assemble_report, EtaCertificate, VerifySettings};

pub const MAX_CELLS: usize = 1_000_000;
const DEFAULT_SUM_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Ratio of the first middle-α set.
    A,
    /// Ratio of the second middle-α set.
    B,
    /// Parameter of the first family member in a sum.
    Lambda1,
    /// Parameter of the second family member in a sum.
    Lambda2,
    /// Centre of the verification window.
    Lambda0,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::A => "a",
            SweepParam::B => "b",
            SweepParam::Lambda1 => "lambda1",
            SweepParam::Lambda2 => "lambda2",
            SweepParam::Lambda0 => "lambda0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(name: SweepParam, lo: f64, hi: f64, steps: usize) -> Self {
        Axis { name, lo, hi, steps }
    }

    /// `steps` evenly spaced values; the last one is exactly `hi`.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k == self.steps - 1 {
                    self.hi
                } else {
                    self.lo + k as f64 * h
                }
            })
            .collect()
    }

    fn validate(&self, field: &str) -> Result<()> {
        let single = self.steps == 1 && self.lo == self.hi;
        if !single && !(self.steps >= 2 && self.lo < self.hi) {
            return Err(Error::config(
                field,
                "need steps >= 2 and lo < hi (or steps = 1 with lo = hi for a single value)",
            ));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::config(field, "bounds must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTask {
    Classify,
    SumMeasure,
    Verify,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOutputs {
    pub csv: Option<String>,
    pub pgm: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub task: SweepTask,
    /// Cover depth for `sum-measure`.
    pub depth: Option<usize>,
    #[serde(default)]
    pub outputs: SweepOutputs,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::config("sweep.axes", "need at least one axis"));
        }
        for (i, ax) in self.axes.iter().enumerate() {
            ax.validate(&format!("sweep.axes[{i}]"))?;
            if self.axes[..i].iter().any(|o| o.name == ax.name) {
                return Err(Error::config(format!("sweep.axes[{i}].name"), "duplicate axis"));
            }
        }
        let cells = self.cell_count();
        if cells > MAX_CELLS as u128 {
            return Err(Error::config(
                "sweep.axes",
                format!("{cells} cells exceed the limit of {MAX_CELLS}"),
            ));
        }
        if self.task == SweepTask::Classify
            && (self.axis(SweepParam::A).is_none() || self.axis(SweepParam::B).is_none())
        {
            return Err(Error::config("sweep.axes", "classify needs axes `a` and `b`"));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> u128 {
        self.axes.iter().map(|a| a.steps as u128).product()
    }

    fn axis(&self, p: SweepParam) -> Option<&Axis> {
        self.axes.iter().find(|a| a.name == p)
    }

    /// Parameter assignments in output order: the first axis varies fastest.
    pub fn cells(&self) -> Vec<Vec<(SweepParam, f64)>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let total = self.cell_count() as usize;
        (0..total)
            .map(|mut idx| {
                self.axes
                    .iter()
                    .zip(&values)
                    .map(|(ax, vals)| {
                        let v = vals[idx % vals.len()];
                        idx /= vals.len();
                        (ax.name, v)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Everything a cell may need besides its own parameters.
#[derive(Debug, Clone, Default)]
pub struct SweepContext {
    pub ifs: Option<Ifs>,
    pub family: Option<CantorFamily>,
    pub second: Option<CoverSource>,
    pub eta: Option<EtaCertificate>,
    pub verify: VerifySettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

fn task_columns(task: SweepTask) -> &'static [&'static str] {
    match task {
        SweepTask::Classify => &["tag", "dim_sum", "thickness_product"],
        SweepTask::SumMeasure => &["depth", "interval_count", "measure", "fitted_ratio", "verdict_hint"],
        SweepTask::Verify => &["pass", "delta_star", "c1", "c2", "c3"],
    }
}

fn lookup(cell: &[(SweepParam, f64)], p: SweepParam) -> Option<f64> {
    cell.iter().find(|c| c.0 == p).map(|c| c.1)
}

fn family_member(ctx: &SweepContext, lambda: f64) -> Result<Ifs> {
    ctx.family
        .as_ref()
        .ok_or_else(|| Error::config("family", "a lambda axis needs a `family` section"))?
        .family_at(lambda)
}

fn run_cell(spec: &SweepSpec, ctx: &SweepContext, cell: &[(SweepParam, f64)]) -> Result<Vec<String>> {
    match spec.task {
        SweepTask::Classify => {
            let a = lookup(cell, SweepParam::A).expect("validated axis");
            let b = lookup(cell, SweepParam::B).expect("validated axis");
            let v = middle_alpha_classify(a, b)?;
            Ok(vec![
                v.tag.to_string(),
                v.dim_sum.to_string(),
                v.thickness_product.to_string(),
            ])
        }
        SweepTask::SumMeasure => {
            let first = match (lookup(cell, SweepParam::A), lookup(cell, SweepParam::Lambda1)) {
                (Some(a), _) => Ifs::middle_alpha(a)?,
                (None, Some(l)) => family_member(ctx, l)?,
                (None, None) => ctx
                    .ifs
                    .clone()
                    .ok_or_else(|| Error::config("ifs", "no first summand"))?,
            };
            let second = match (lookup(cell, SweepParam::B), lookup(cell, SweepParam::Lambda2)) {
                (Some(b), _) => CoverSource::Ifs(Ifs::middle_alpha(b)?),
                (None, Some(l)) => CoverSource::Ifs(family_member(ctx, l)?),
                (None, None) => ctx
                    .second
                    .clone()
                    .ok_or_else(|| Error::config("compact_set", "no second summand"))?,
            };
            let depth = spec.depth.unwrap_or(DEFAULT_SUM_DEPTH);
            let an = sum_cover_analysis(&first, &second, depth, DEFAULT_CYLINDER_CAP, DEFAULT_PAIR_CAP)?;
            let last = an
                .rows
                .last()
                .ok_or_else(|| Error::config("sweep.depth", "must be positive"))?;
            Ok(vec![
                last.depth.to_string(),
                last.interval_count.to_string(),
                last.measure.to_string(),
                an.fitted_ratio.map(|r| r.to_string()).unwrap_or_default(),
                an.hint.as_str().to_string(),
            ])
        }
        SweepTask::Verify => {
            let fam = ctx
                .family
                .as_ref()
                .ok_or_else(|| Error::config("family", "verify needs a `family` section"))?;
            let eta = ctx
                .eta
                .as_ref()
                .ok_or_else(|| Error::config("compact_set", "verify needs a measure on K"))?;
            let mut settings = ctx.verify.clone();
            if let Some(l0) = lookup(cell, SweepParam::Lambda0) {
                settings.lambda0 = Some(l0);
            }
            let r = assemble_report(fam, eta, &settings)?;
            Ok(vec![
                r.pass.to_string(),
                r.delta_star.to_string(),
                r.c1.to_string(),
                r.c2.to_string(),
                r.c3.to_string(),
            ])
        }
    }
}

/// Runs every cell; failures are recorded in the `error` column and the run continues.
pub fn run_sweep(spec: &SweepSpec, ctx: &SweepContext) -> Result<SweepTable> {
    spec.validate()?;
    let cols = task_columns(spec.task);
    let mut header: Vec<String> = spec.axes.iter().map(|a| a.name.as_str().to_string()).collect();
    header.extend(cols.iter().map(|c| c.to_string()));
    header.push("error".into());
    let rows = spec
        .cells()
        .par_iter()
        .map(|cell| {
            let mut row: Vec<String> = cell.iter().map(|c| c.1.to_string()).collect();
            match run_cell(spec, ctx, cell) {
                Ok(vals) => {
                    row.extend(vals);
                    row.push(String::new());
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), cols.len()));
                    row.push(csv_field(&e.to_string()));
                }
            }
            row
        })
        .collect();
    Ok(SweepTable { header, rows })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Classification of `C_a + C_b` over a grid; rows are ordered by increasing `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub verdicts: Vec<RegionVerdict>,
}

impl RegionMap {
    pub fn at(&self, i: usize, j: usize) -> &RegionVerdict {
        &self.verdicts[j * self.a.len() + i]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,tag,dim_sum,thickness_product\n");
        for (j, b) in self.b.iter().enumerate() {
            for (i, a) in self.a.iter().enumerate() {
                let v = self.at(i, j);
                let _ = writeln!(out, "{a},{b},{},{},{}", v.tag, v.dim_sum, v.thickness_product);
            }
        }
        out
    }

    /// Plain PGM, one row per `b` value, 0 = cantor zone, 1 = region R, 2 = interval zone.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n2\n", self.a.len(), self.b.len());
        for j in 0..self.b.len() {
            let row: Vec<String> = (0..self.a.len())
                .map(|i| self.at(i, j).tag.pixel().to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Number of 4-connected components of the pixels carrying `tag`.
    pub fn component_count(&self, tag: RegionTag) -> usize {
        let (w, h) = (self.a.len(), self.b.len());
        let mut seen = vec![false; w * h];
        let mut count = 0;
        for start in 0..w * h {
            if seen[start] || self.verdicts[start].tag != tag {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(k) = stack.pop() {
                let (i, j) = (k % w, k / w);
                let mut push = |ii: usize, jj: usize| {
                    let q = jj * w + ii;
                    if !seen[q] && self.verdicts[q].tag == tag {
                        seen[q] = true;
                        stack.push(q);
                    }
                };
                if i > 0 {
                    push(i - 1, j);
                }
                if i + 1 < w {
                    push(i + 1, j);
                }
                if j > 0 {
                    push(i, j - 1);
                }
                if j + 1 < h {
                    push(i, j + 1);
                }
            }
        }
        count
    }
}

pub fn region_map(a: &Axis, b: &Axis) -> Result<RegionMap> {
    a.validate("a")?;
    b.validate("b")?;
    let (av, bv) = (a.values(), b.values());
    let verdicts = bv
        .par_iter()
        .flat_map_iter(|&y| av.iter().map(move |&x| middle_alpha_classify(x, y)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionMap { a: av, b: bv, verdicts })
}
