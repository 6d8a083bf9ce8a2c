use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use natred::pipeline::{self, AlgebraSource, ExitStatus, Pipeline, RunConfig, SweepSpec, DEFAULT_SEED};
use natred::Tolerance;

#[derive(Parser)]
#[command(name = "natred", version, about = "Verify naturally reductive structures on Lie groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one pipeline and print its report.
    Run {
        /// tangent, direct-product-crosscheck, gxg, s7, spinor or validate-algebra.
        #[arg(value_parser = parse_pipeline)]
        pipeline: Pipeline,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: Params<f64>,
    },
    /// Run a pipeline over a parameter grid or seeded random points.
    Sweep {
        /// tangent, direct-product-crosscheck, gxg, s7, spinor or validate-algebra.
        #[arg(value_parser = parse_pipeline)]
        pipeline: Pipeline,
        #[command(flatten)]
        common: Common,
        /// Comma-separated values per parameter; the grid is their product.
        #[command(flatten)]
        params: Params<Axis>,
        /// Draw this many parameter points instead of a grid.
        #[arg(long, conflicts_with_all = ["a", "b", "c", "d", "lambda"])]
        random: Option<usize>,
        /// Also write a CSV summary here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check an algebra: Jacobi identity, antisymmetry, invariant metric.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Preset name (su2, su3, so3, so4, so5, u2, su2+su2, abelianN, g2).
    #[arg(long, conflicts_with = "file")]
    algebra: Option<String>,
    /// Algebra file with 1-based entries.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Sphere points for the s7 pipeline.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Absolute and relative tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Params<T: Clone + Send + Sync + 'static>
where
    T: std::str::FromStr,
{
    #[arg(long, allow_hyphen_values = true, value_parser = parse_value::<T>)]
    a: Option<T>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_value::<T>)]
    b: Option<T>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_value::<T>)]
    c: Option<T>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_value::<T>)]
    d: Option<T>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_value::<T>)]
    lambda: Option<T>,
}

impl<T: Clone + Send + Sync + std::str::FromStr + 'static> Params<T> {
    fn entries(&self) -> Vec<(&'static str, T)> {
        [("a", &self.a), ("b", &self.b), ("c", &self.c), ("d", &self.d), ("lambda", &self.lambda)]
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

fn parse_pipeline(s: &str) -> Result<Pipeline, String> {
    s.parse().map_err(|e: natred::Error| e.to_string())
}

/// Parses a flag value.
fn parse_value<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse '{s}'"))
}

/// Comma-separated list of numbers for sweep axes.
#[derive(Clone, Debug)]
struct Axis(Vec<f64>);

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| format!("cannot parse '{v}'"))).collect::<Result<_, _>>().map(Axis)
    }
}

fn config(pipeline: Pipeline, common: &Common) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::new(pipeline);
    cfg.algebra = match (&common.algebra, &common.file) {
        (Some(name), _) => Some(AlgebraSource::Preset(name.clone())),
        (None, Some(path)) => Some(AlgebraSource::File(path.clone())),
        (None, None) => None,
    };
    cfg.samples = common.samples;
    cfg.seed = common.seed;
    if let Some(t) = common.tol {
        cfg.tolerance = Tolerance::new(t, t).ok_or_else(|| format!("tolerance must be positive, got {t}"))?;
    }
    Ok(cfg)
}

fn emit(common: &Common, text: &str) -> Result<(), String> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(status: ExitStatus, error: Option<String>) -> ExitCode {
    if let Some(e) = error {
        eprintln!("natred: {e}");
    }
    ExitCode::from(status.code() as u8)
}

fn run_one(pipeline: Pipeline, common: &Common, params: &[(&str, f64)]) -> ExitCode {
    let mut cfg = match config(pipeline, common) {
        Ok(c) => c,
        Err(e) => return finish(ExitStatus::ConfigError, Some(e)),
    };
    for (k, v) in params {
        cfg.params.insert(k.to_string(), *v);
    }
    let out = pipeline::run(&cfg);
    if let Some(rep) = &out.report {
        let text = match common.format {
            Format::Text => rep.to_text(),
            Format::Structured => rep.to_json() + "\n",
        };
        if let Err(e) = emit(common, &text) {
            return finish(ExitStatus::ConfigError, Some(e));
        }
    }
    finish(out.status, out.error)
}

fn run_sweep(pipeline: Pipeline, common: &Common, axes: Vec<(&str, Axis)>, random: Option<usize>, csv: Option<PathBuf>) -> ExitCode {
    let base = match config(pipeline, common) {
        Ok(c) => c,
        Err(e) => return finish(ExitStatus::ConfigError, Some(e)),
    };
    let spec = match random {
        Some(samples) => SweepSpec::Random { samples },
        None => SweepSpec::Grid(axes.into_iter().map(|(k, v)| (k.to_string(), v.0)).collect::<BTreeMap<_, _>>()),
    };
    let result = match pipeline::sweep(&base, &spec) {
        Ok(r) => r,
        Err(e) => return finish(ExitStatus::of_error(&e), Some(e.to_string())),
    };
    if let Some(path) = csv {
        if let Err(e) = std::fs::write(&path, result.to_csv()) {
            return finish(ExitStatus::ConfigError, Some(format!("cannot write {}: {e}", path.display())));
        }
    }
    let text = match common.format {
        Format::Text => result.summary(),
        Format::Structured => result.to_json() + "\n",
    };
    if let Err(e) = emit(common, &text) {
        return finish(ExitStatus::ConfigError, Some(e));
    }
    finish(result.status(), None)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { pipeline, common, params } => run_one(pipeline, &common, &params.entries()),
        Command::Sweep { pipeline, common, params, random, csv } => run_sweep(pipeline, &common, params.entries(), random, csv),
        Command::Validate { common } => run_one(Pipeline::ValidateAlgebra, &common, &[]),
    }
}
