use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cantorsum_core::config::Config;
use cantorsum_core::dimension::{box_count, ifs_cover_levels};
use cantorsum_core::geometry::DEFAULT_PAIR_CAP;
use cantorsum_core::sweep::{region_map, run_sweep, SweepContext, SweepParam, SweepTask};
use cantorsum_core::{
    assemble_report, box_dimension_estimate, entropy, lyapunov_exponent, moran_dimension, sum_cover_analysis,
    CoverSource, Error, OrbitSample, DEFAULT_CYLINDER_CAP,
};
use clap::{Parser, Subcommand};

const DEFAULT_DIMENSION_DEPTH: usize = 12;
const DEFAULT_SUM_DEPTH: usize = 8;

#[derive(Parser)]
#[command(
    name = "cantorsum",
    version,
    about = "Dimensions, sumsets and transversality checks for Cantor sets on the line"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Depth override (cover depth, or the verification depth for `verify`).
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed override for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Moran, box and measure-theoretic dimension of the configured IFS.
    Dimension,
    /// Classify a grid of middle-α pairs (needs `sweep.axes` for `a` and `b`).
    RegionMap,
    /// Measures of generation covers of `ifs + compact_set`.
    Sum,
    /// Transversality report for `family` against the measure on `compact_set`.
    Verify,
    /// Run the configured sweep.
    Sweep,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        pool = pool.num_threads(n.max(1));
    }
    let outcome = match pool.build() {
        Ok(pool) => pool.install(|| run(&cli)),
        Err(e) => Err(Failure {
            code: 1,
            message: e.to_string(),
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CliResult {
    let path = cli.config.as_deref().ok_or_else(|| Failure {
        code: 1,
        message: "--config is required".into(),
    })?;
    let mut cfg = Config::from_path(path)?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    fs::create_dir_all(&cli.out)?;
    let base = path.parent().unwrap_or(Path::new("."));
    match cli.command {
        Command::Dimension => dimension(cli, &cfg),
        Command::RegionMap => region(cli, &cfg),
        Command::Sum => sum(cli, &cfg, base),
        Command::Verify => verify(cli, &cfg, base),
        Command::Sweep => sweep(cli, &cfg, base),
    }
}

/// Largest `k` with `base^k <= cap`.
fn max_depth(base: f64, cap: f64) -> usize {
    if base <= 1.0 {
        return usize::MAX;
    }
    (cap.ln() / base.ln() + 1e-9).floor() as usize
}

fn with_depth_hint(e: Error, suggested: usize) -> Failure {
    let mut f = Failure::from(e);
    if f.code == 2 {
        f.message = format!("{}; try --depth {suggested} or less", f.message);
    }
    f
}

fn dimension(cli: &Cli, cfg: &Config) -> CliResult {
    let ifs = cfg.ifs()?;
    let ratios = ifs.ratios();
    let depth = cli.depth.unwrap_or(DEFAULT_DIMENSION_DEPTH);
    let suggested = max_depth(ifs.len() as f64, DEFAULT_CYLINDER_CAP as f64);
    let levels = ifs_cover_levels(&ifs, 1..=depth, DEFAULT_CYLINDER_CAP).map_err(|e| with_depth_hint(e, suggested))?;
    let weights = cfg.weights(&ifs)?;
    let sample = OrbitSample {
        seed: cfg.seed.unwrap_or(0),
        ..OrbitSample::default()
    };
    let lyap = lyapunov_exponent(&ifs, &weights, sample)?;
    let h = entropy(&weights);

    if ifs.is_affine() {
        println!("similarity dimension: {}", moran_dimension(&ratios)?);
    } else {
        println!("similarity dimension: n/a (perturbed maps)");
    }
    match box_dimension_estimate(&levels) {
        Ok(b) => {
            let worst = b.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            println!("box dimension estimate: {} (max residual {worst})", b.slope);
        }
        Err(e) => println!("box dimension estimate: n/a ({e})"),
    }
    println!("entropy: {h}");
    println!("lyapunov exponent: {} (std error {})", lyap.value, lyap.std_error);
    println!("measure dimension: {}", h / lyap.value);

    let mut csv = String::from("depth,mesh,count\n");
    for l in &levels {
        csv.push_str(&format!("{},{},{}\n", l.depth, l.mesh, box_count(&l.cover, l.mesh)));
    }
    fs::write(cli.out.join("dimension.csv"), csv)?;
    Ok(())
}

fn region(cli: &Cli, cfg: &Config) -> CliResult {
    let spec = cfg.sweep.as_ref().ok_or_else(|| {
        Failure::from(Error::Config {
            field: "sweep".into(),
            message: "section missing".into(),
        })
    })?;
    let axis = |p: SweepParam| {
        spec.axes.iter().find(|a| a.name == p).copied().ok_or_else(|| {
            Failure::from(Error::Config {
                field: "sweep.axes".into(),
                message: format!("region-map needs an axis `{}`", p.as_str()),
            })
        })
    };
    let map = region_map(&axis(SweepParam::A)?, &axis(SweepParam::B)?)?;
    let csv = spec.outputs.csv.as_deref().unwrap_or("region_map.csv");
    let pgm = spec.outputs.pgm.as_deref().unwrap_or("region_map.pgm");
    fs::write(cli.out.join(csv), map.to_csv())?;
    fs::write(cli.out.join(pgm), map.to_pgm())?;
    println!("{} x {} region map written", map.a.len(), map.b.len());
    Ok(())
}

fn sum(cli: &Cli, cfg: &Config, _base: &Path) -> CliResult {
    let first = cfg.ifs()?;
    let family = cfg.family.as_ref().map(|f| f.build()).transpose()?;
    let second = cfg.compact_set()?.cover_source(family.as_ref())?;
    let depth = cli.depth.unwrap_or(DEFAULT_SUM_DEPTH);
    let second_growth = match &second {
        CoverSource::Ifs(ifs) => ifs.len() as f64,
        CoverSource::Fixed(_) => 1.0,
    };
    let suggested = max_depth(first.len() as f64 * second_growth, DEFAULT_PAIR_CAP as f64).min(max_depth(
        first.len().max(second_growth as usize) as f64,
        DEFAULT_CYLINDER_CAP as f64,
    ));
    let an = sum_cover_analysis(&first, &second, depth, DEFAULT_CYLINDER_CAP, DEFAULT_PAIR_CAP)
        .map_err(|e| with_depth_hint(e, suggested))?;
    let mut csv = String::from("depth,interval_count,measure,verdict_hint\n");
    for r in &an.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.depth,
            r.interval_count,
            r.measure,
            r.hint.as_str()
        ));
    }
    fs::write(cli.out.join("sum.csv"), &csv)?;
    print!("{csv}");
    match an.fitted_ratio {
        Some(r) => println!("fitted ratio: {r}"),
        None => println!("fitted ratio: n/a"),
    }
    println!("verdict hint: {}", an.hint.as_str());
    Ok(())
}

fn verify(cli: &Cli, cfg: &Config, base: &Path) -> CliResult {
    let family = cfg.family()?;
    let eta = cfg.compact_set()?.eta(Some(&family), base)?;
    let mut settings = cfg.verify_settings();
    if let Some(d) = cli.depth {
        settings.depth = d;
        settings.validate()?;
    }
    let report = match assemble_report(&family, &eta, &settings) {
        Ok(r) => r,
        Err(e @ Error::InfeasibleTriple(_)) => {
            return Err(Failure {
                code: 3,
                message: e.to_string(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })?;
    fs::write(cli.out.join("verify.json"), json + "\n")?;
    println!("{report}");
    if report.pass {
        Ok(())
    } else {
        Err(Failure {
            code: 3,
            message: "verification failed".into(),
        })
    }
}

fn sweep(cli: &Cli, cfg: &Config, base: &Path) -> CliResult {
    let mut spec = cfg.sweep.clone().ok_or_else(|| {
        Failure::from(Error::Config {
            field: "sweep".into(),
            message: "section missing".into(),
        })
    })?;
    if cli.depth.is_some() {
        spec.depth = cli.depth;
    }
    let family = cfg.family.as_ref().map(|f| f.build()).transpose()?;
    let ifs = cfg.ifs.as_ref().map(|s| s.build("ifs")).transpose()?;
    let mut ctx = SweepContext {
        ifs,
        verify: cfg.verify_settings(),
        ..SweepContext::default()
    };
    if let Some(k) = &cfg.compact_set {
        if spec.task == SweepTask::SumMeasure && k.histogram.is_none() {
            ctx.second = Some(k.cover_source(family.as_ref())?);
        }
        if spec.task == SweepTask::Verify {
            ctx.eta = Some(k.eta(family.as_ref(), base)?);
        }
    }
    ctx.family = family;
    let table = run_sweep(&spec, &ctx)?;
    let csv = spec.outputs.csv.as_deref().unwrap_or("sweep.csv");
    fs::write(cli.out.join(csv), table.to_csv())?;
    if let Some(pgm) = &spec.outputs.pgm {
        let axis = |p: SweepParam| spec.axes.iter().find(|a| a.name == p).copied();
        match (spec.task, axis(SweepParam::A), axis(SweepParam::B)) {
            (SweepTask::Classify, Some(a), Some(b)) => fs::write(cli.out.join(pgm), region_map(&a, &b)?.to_pgm())?,
            _ => {
                return Err(Failure::from(Error::Config {
                    field: "sweep.outputs.pgm".into(),
                    message: "an image is only produced for a classify sweep over `a` and `b`".into(),
                }))
            }
        }
    }
    let failed = table
        .rows
        .iter()
        .filter(|r| !r.last().is_none_or(|e| e.is_empty()))
        .count();
    println!("{} cells, {failed} with errors", table.rows.len());
    Ok(())
}
