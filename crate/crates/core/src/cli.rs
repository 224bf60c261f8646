//! Command-line front end. The binary only forwards to [`run`].
//!
//! Exit codes: 0 success or cointegrated, 3 spurious, 2 usage or validation
//! error, 1 runtime or I/O error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::adalasso::ResidualMode;
use crate::dgp::{simulate, DgpConfig};
use crate::error::Error;
use crate::harness::{render_manifest, render_tables, render_timings, run_cell, ExperimentGrid};
use crate::io::{load_dataset, save_dataset, sidecar_path};
use crate::kv::KvMap;
use crate::pipeline::{detect_timed, DetectionRecord, LambdaUnits, PipelineConfig};
use crate::stationarity::{PenaltyRule, Verdict};

/// Default output directory when `--output` is absent.
pub const OUTPUT_DIR_ENV: &str = "SPARSE_COINT_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SPURIOUS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sparse-coint", version, about = "Sparse cointegration detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one dataset from a config file.
    Simulate(SimulateArgs),
    /// Run selection and classification on a dataset CSV.
    Detect(DetectArgs),
    /// Run a Monte Carlo grid and write the result tables.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// `key = value` config with n, p, rho, beta_active, ...
    config: PathBuf,
    /// Output CSV; defaults to `dataset.csv` in the output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long)]
    gamma: Option<f64>,
    /// Multiplier applied to the lambda grid.
    #[arg(long)]
    grid_scale: Option<f64>,
    #[arg(long, value_parser = parse_residual_mode)]
    residual_mode: Option<ResidualMode>,
    #[arg(long)]
    kmax: Option<usize>,
    /// bic, sqrt, log:<c> or fixed:<c>.
    #[arg(long, value_parser = parse_penalty)]
    penalty: Option<PenaltyRule>,
    /// raw or per-observation.
    #[arg(long, value_parser = parse_units)]
    lambda_units: Option<LambdaUnits>,
}

fn parse_residual_mode(s: &str) -> Result<ResidualMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_penalty(s: &str) -> Result<PenaltyRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_units(s: &str) -> Result<LambdaUnits, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl PipelineArgs {
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<(), Error> {
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        if let Some(s) = self.grid_scale {
            cfg.grid = cfg.grid.with_scale(s)?;
        }
        if let Some(m) = self.residual_mode {
            cfg.residual_mode = m;
        }
        if let Some(k) = self.kmax {
            cfg.ic.k_max = Some(k);
        }
        if let Some(p) = self.penalty {
            cfg.ic.penalty = p;
        }
        if let Some(u) = self.lambda_units {
            cfg.lambda_units = u;
        }
        cfg.validate()
    }
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// CSV with header `y,x1,...,xp`.
    data: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Include per-stage wall times in the record.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    /// Grid config file.
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides `base_seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

/// Maps an error to its exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::InvalidConfig { .. }
        | Error::Parse { .. }
        | Error::Dimension(_)
        | Error::EmptyInput
        | Error::InitialOlsInfeasible { .. }
        | Error::RankDeficient { .. }
        | Error::NotPositiveDefinite { .. } => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

fn output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn read_kv(path: &Path) -> Result<KvMap, Error> {
    KvMap::parse(&fs::read_to_string(path)?)
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Detect(a) => cmd_detect(&a, out),
        Command::Montecarlo(a) => cmd_montecarlo(&a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let mut cfg = DgpConfig::from_kv(&read_kv(&a.config)?)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let ds = simulate(&cfg)?;
    let path = a.output.clone().unwrap_or_else(|| output_dir().join("dataset.csv"));
    save_dataset(&path, &cfg, &ds)?;
    writeln!(out, "wrote {} and {}", path.display(), sidecar_path(&path).display())?;
    Ok(EXIT_OK)
}

fn cmd_detect(a: &DetectArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let mut cfg = PipelineConfig::default();
    a.pipeline.apply(&mut cfg)?;
    let ds = load_dataset(&a.data)?;
    let (res, timings) = detect_timed(&ds, &cfg)?;
    let record = DetectionRecord::new(&res, a.timings.then_some(&timings));
    writeln!(out, "{}", record.to_json())?;
    Ok(match res.verdict {
        Verdict::Cointegrated => EXIT_OK,
        Verdict::Spurious => EXIT_SPURIOUS,
    })
}

fn cmd_montecarlo(a: &MonteCarloArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let mut grid = ExperimentGrid::from_kv(&read_kv(&a.config)?)?;
    if let Some(seed) = a.seed {
        grid.base_seed = seed;
    }
    if let Some(r) = a.replications {
        grid.replications = r;
    }
    a.pipeline.apply(&mut grid.pipeline)?;
    if let Some(g) = a.pipeline.gamma {
        grid.gamma_values = vec![g];
    }
    grid.validate()?;

    let dir = a.output.clone().unwrap_or_else(output_dir);
    fs::create_dir_all(&dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))?;
    let cells = grid.cells();
    let mut results = Vec::with_capacity(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let r = pool.install(|| run_cell(cell, &grid))?;
        let (fpr, fnr) = r.metrics.map_or((f64::NAN, f64::NAN), |m| (m.mean_fpr, m.mean_fnr));
        let _ = writeln!(
            err,
            "[{}/{}] preset={} n={} p={} rho={} gamma={}: fpr={fpr:.3} fnr={fnr:.3} i0={:.3} failures={} ({:.1}s)",
            i + 1,
            cells.len(),
            r.cell.preset_label(),
            r.cell.n,
            r.cell.p,
            r.cell.rho,
            r.cell.gamma,
            r.freq_i0,
            r.failures,
            r.wall_time.as_secs_f64(),
        );
        results.push(r);
    }

    let mut files = render_tables(&results);
    files.push(render_timings(&results));
    files.push(render_manifest(&grid));
    for f in &files {
        fs::write(dir.join(&f.file_name), &f.contents)?;
    }
    writeln!(out, "wrote {} files to {}", files.len(), dir.display())?;

    let invalid: Vec<_> = results.iter().filter(|r| !r.valid()).collect();
    for r in &invalid {
        let _ = writeln!(err, "invalid cell {:?}: {} of {} replications failed", r.cell, r.failures, r.replications);
    }
    Ok(if invalid.is_empty() { EXIT_OK } else { EXIT_RUNTIME })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("sparse-coint").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flags_are_usage_errors() {
        let (code, _, err) = run_capture(&["detect", "x.csv", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--bogus"));
        let (code, _, _) = run_capture(&["detect", "x.csv", "--residual-mode", "sideways"]);
        assert_eq!(code, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_file_is_runtime_error() {
        let (code, _, err) = run_capture(&["detect", "/nonexistent/data.csv"]);
        assert_eq!(code, EXIT_RUNTIME);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn codes_follow_root_error() {
        assert_eq!(exit_code(&Error::invalid("rho", "bad")), EXIT_USAGE);
        let staged = Error::Stage {
            stage: crate::error::Stage::LambdaSelection,
            source: Box::new(Error::NoUsableLambda),
        };
        assert_eq!(exit_code(&staged), EXIT_RUNTIME);
    }
}
