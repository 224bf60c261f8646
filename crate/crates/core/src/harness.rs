//! Monte Carlo experiments over grids of simulation designs.
//!
//! Every replication draws its own seed from `(base_seed, cell, r)` through
//! [`replication_seed`], so results never depend on scheduling or on which
//! other cells share the run.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::adalasso::{certify_kkt, LambdaGrid, ResidualMode};
use crate::dgp::{simulate, DgpConfig, EndogeneityPolicy, SignalPreset};
use crate::error::{Error, Result};
use crate::kv::{self, KvMap};
use crate::metrics::{aggregate, score_selection, AggregateMetrics};
use crate::pipeline::{detect, PipelineConfig};
use crate::stationarity::{PenaltyRule, Verdict};

/// KKT tolerance applied to every converged fit.
pub const KKT_TOL: f64 = 1e-6;

/// Share of failed replications above which a cell is flagged invalid.
pub const MAX_FAILURE_SHARE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub gamma: f64,
    pub preset: SignalPreset,
}

impl Cell {
    /// `strong`, `weak`, or the custom coefficients joined by `;`.
    pub fn preset_label(&self) -> String {
        preset_label(&self.preset)
    }
}

fn preset_label(preset: &SignalPreset) -> String {
    match preset {
        SignalPreset::Custom(b) => b.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
        other => other.name().to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub n_values: Vec<usize>,
    pub p_values: Vec<usize>,
    pub rho_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub presets: Vec<SignalPreset>,
    pub replications: usize,
    pub base_seed: u64,
    /// Applied to every cell; its `gamma` is replaced by the cell's.
    pub pipeline: PipelineConfig,
    pub tau: f64,
    pub endogeneity: EndogeneityPolicy,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        Self {
            n_values: vec![500],
            p_values: vec![10, 50, 100],
            rho_values: vec![0.0, 0.5, 1.0],
            gamma_values: vec![1.0, 2.0],
            presets: vec![SignalPreset::Strong],
            replications: 1000,
            base_seed: 0,
            pipeline: PipelineConfig::default(),
            tau: 1.0,
            endogeneity: EndogeneityPolicy::DEFAULT_SHRINK,
        }
    }
}

impl ExperimentGrid {
    pub const KEYS: [&'static str; 16] = [
        "n_values",
        "p_values",
        "rho_values",
        "gamma_values",
        "presets",
        "replications",
        "base_seed",
        "grid_scale",
        "lambda_grid",
        "lambda_units",
        "residual_mode",
        "k_max",
        "penalty",
        "tau",
        "endogeneity",
        "max_r2",
    ];

    /// A grid of exactly one cell.
    pub fn single(cell: &Cell, replications: usize, base_seed: u64) -> Self {
        Self {
            n_values: vec![cell.n],
            p_values: vec![cell.p],
            rho_values: vec![cell.rho],
            gamma_values: vec![cell.gamma],
            presets: vec![cell.preset.clone()],
            replications,
            base_seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("n_values", self.n_values.is_empty()),
            ("p_values", self.p_values.is_empty()),
            ("rho_values", self.rho_values.is_empty()),
            ("gamma_values", self.gamma_values.is_empty()),
            ("presets", self.presets.is_empty()),
        ];
        if let Some((field, _)) = lists.iter().find(|(_, empty)| *empty) {
            return Err(Error::invalid(*field, "list is empty"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        for cell in self.cells() {
            self.dgp_config(&cell, 0).validate()?;
            self.pipeline.clone().with_gamma(cell.gamma).validate()?;
            if cell.n <= cell.p + 1 {
                return Err(Error::invalid(
                    "p_values",
                    format!("p = {} leaves too few observations at n = {}", cell.p, cell.n),
                ));
            }
        }
        Ok(())
    }

    /// Cells in preset, n, p, rho, gamma order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for preset in &self.presets {
            for &n in &self.n_values {
                for &p in &self.p_values {
                    for &rho in &self.rho_values {
                        for &gamma in &self.gamma_values {
                            out.push(Cell {
                                n,
                                p,
                                rho,
                                gamma,
                                preset: preset.clone(),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn dgp_config(&self, cell: &Cell, seed: u64) -> DgpConfig {
        let mut cfg = DgpConfig::simulation_design(&cell.preset, cell.n, cell.p, cell.rho, seed);
        cfg.tau = self.tau;
        cfg.endogeneity = self.endogeneity;
        cfg
    }

    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        kv.reject_unknown(&Self::KEYS)?;
        let d = Self::default();
        let presets = match kv.raw("presets") {
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| Error::invalid("presets", format!("cannot parse `{s}`"))))
                .collect::<Result<Vec<SignalPreset>>>()?,
            None => d.presets,
        };
        let mut pipeline = PipelineConfig::default();
        if let Some(values) = kv.get_list::<f64>("lambda_grid")? {
            pipeline.grid = LambdaGrid::new(values, 1.0)?;
        }
        if let Some(scale) = kv.get::<f64>("grid_scale")? {
            pipeline.grid = pipeline.grid.with_scale(scale)?;
        }
        pipeline.lambda_units = kv.get_or("lambda_units", pipeline.lambda_units)?;
        pipeline.residual_mode = kv.get_or::<ResidualMode>("residual_mode", pipeline.residual_mode)?;
        pipeline.ic.k_max = kv.get("k_max")?;
        pipeline.ic.penalty = kv.get_or::<PenaltyRule>("penalty", pipeline.ic.penalty)?;
        let endogeneity = match kv.raw("endogeneity").unwrap_or("shrink") {
            "exact" => EndogeneityPolicy::Exact,
            "shrink" => EndogeneityPolicy::Shrink {
                max_r2: kv.get_or("max_r2", 0.9)?,
            },
            other => return Err(Error::invalid("endogeneity", format!("unknown policy `{other}`"))),
        };
        let grid = Self {
            n_values: kv.get_list("n_values")?.unwrap_or(d.n_values),
            p_values: kv.get_list("p_values")?.unwrap_or(d.p_values),
            rho_values: kv.get_list("rho_values")?.unwrap_or(d.rho_values),
            gamma_values: kv.get_list("gamma_values")?.unwrap_or(d.gamma_values),
            presets,
            replications: kv.get_or("replications", d.replications)?,
            base_seed: kv.get_or("base_seed", d.base_seed)?,
            pipeline,
            tau: kv.get_or("tau", d.tau)?,
            endogeneity,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn to_kv(&self) -> KvMap {
        let mut kv = KvMap::default();
        kv.insert("n_values", kv::join(&self.n_values));
        kv.insert("p_values", kv::join(&self.p_values));
        kv.insert("rho_values", kv::join(&self.rho_values));
        kv.insert("gamma_values", kv::join(&self.gamma_values));
        let presets: Vec<String> = self.presets.iter().map(preset_label).collect();
        kv.insert("presets", presets.join(", "));
        kv.insert("replications", self.replications);
        kv.insert("base_seed", self.base_seed);
        kv.insert("lambda_grid", kv::join(self.pipeline.grid.values()));
        kv.insert("grid_scale", self.pipeline.grid.scale());
        kv.insert("lambda_units", self.pipeline.lambda_units);
        kv.insert("residual_mode", self.pipeline.residual_mode);
        if let Some(k) = self.pipeline.ic.k_max {
            kv.insert("k_max", k);
        }
        kv.insert("penalty", self.pipeline.ic.penalty);
        kv.insert("tau", self.tau);
        match self.endogeneity {
            EndogeneityPolicy::Exact => kv.insert("endogeneity", "exact"),
            EndogeneityPolicy::Shrink { max_r2 } => {
                kv.insert("endogeneity", "shrink");
                kv.insert("max_r2", max_r2);
            }
        }
        kv
    }
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// The splitmix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `r` (zero-based) in `cell`.
///
/// Starting from `h = base_seed`, each word `w` of
/// `[n, p, bits(rho), bits(gamma), tag, c_1 bits, …, c_s bits, r]`
/// updates `h ← splitmix64(h + GOLDEN ^ w)` with wrapping addition evaluated
/// first, where `GOLDEN = 0x9e3779b97f4a7c15` and `tag` is 1 for strong,
/// 2 for weak and 3 for custom (followed by its coefficient bits).
pub fn replication_seed(base_seed: u64, cell: &Cell, r: u64) -> u64 {
    let mut words = vec![
        cell.n as u64,
        cell.p as u64,
        cell.rho.to_bits(),
        cell.gamma.to_bits(),
    ];
    match &cell.preset {
        SignalPreset::Strong => words.push(1),
        SignalPreset::Weak => words.push(2),
        SignalPreset::Custom(b) => {
            words.push(3);
            words.extend(b.iter().map(|v| v.to_bits()));
        }
    }
    words.push(r);
    words
        .into_iter()
        .fold(base_seed, |h, w| splitmix64(h.wrapping_add(GOLDEN) ^ w))
}

/// Outcome of one successful replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub metrics: crate::metrics::SelectionMetrics,
    pub verdict: Verdict,
    /// Estimates for covariates `0..min(p, s + 1)`.
    pub beta_head: Vec<f64>,
    /// Converged fits along the penalty path.
    pub converged_fits: usize,
    /// Of those, the ones passing [`certify_kkt`] at [`KKT_TOL`].
    pub kkt_passed: usize,
}

pub fn run_replication(grid: &ExperimentGrid, cell: &Cell, r: u64) -> Result<Replication> {
    let seed = replication_seed(grid.base_seed, cell, r);
    let ds = simulate(&grid.dgp_config(cell, seed))?;
    let config = grid.pipeline.clone().with_gamma(cell.gamma);
    let det = detect(&ds, &config)?;
    let truth = ds.true_active.as_deref().unwrap_or(&[]);
    let metrics = score_selection(&det.selected_covariates, truth, cell.p)?;
    let head = cell.p.min(truth.len() + 1);
    let converged: Vec<_> = det.path.iter().filter(|pt| pt.converged).collect();
    let kkt_passed = converged
        .iter()
        .filter(|pt| certify_kkt(&pt.fit, &ds, KKT_TOL).pass)
        .count();
    Ok(Replication {
        metrics,
        verdict: det.verdict,
        beta_head: det.fit.beta[..head].to_vec(),
        converged_fits: converged.len(),
        kkt_passed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    pub replications: usize,
    pub failures: usize,
    /// `None` when every replication failed.
    pub metrics: Option<AggregateMetrics>,
    pub freq_i0: f64,
    pub freq_i1: f64,
    /// True coefficients of covariates `0..min(p, s + 1)`.
    pub beta_true: Vec<f64>,
    pub beta_mean: Vec<f64>,
    /// Converged path fits over all replications.
    pub converged_fits: usize,
    pub kkt_passed: usize,
    pub wall_time: Duration,
}

impl CellResult {
    pub fn completed(&self) -> usize {
        self.replications - self.failures
    }

    /// False when more than 1% of replications failed.
    pub fn valid(&self) -> bool {
        self.completed() > 0 && self.failures as f64 <= MAX_FAILURE_SHARE * self.replications as f64
    }
}

/// Runs every replication of `cell`, in parallel on the current rayon pool.
pub fn run_cell(cell: &Cell, grid: &ExperimentGrid) -> Result<CellResult> {
    grid.validate()?;
    let clock = Instant::now();
    let outcomes: Vec<Result<Replication>> = (0..grid.replications as u64)
        .into_par_iter()
        .map(|r| run_replication(grid, cell, r))
        .collect();
    let mut ok = Vec::with_capacity(outcomes.len());
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(rep) => ok.push(rep),
            Err(e) => log::warn!("replication {r} of {cell:?} failed: {e}"),
        }
    }
    let failures = grid.replications - ok.len();
    let s = cell.preset.coefficients().len();
    let head = cell.p.min(s + 1);
    let mut beta_true = cell.preset.coefficients();
    beta_true.resize(head, 0.0);

    let m = ok.len() as f64;
    let metrics = if ok.is_empty() {
        None
    } else {
        Some(aggregate(&ok.iter().map(|r| r.metrics).collect::<Vec<_>>())?)
    };
    let i0 = ok.iter().filter(|r| r.verdict == Verdict::Cointegrated).count();
    let (freq_i0, freq_i1) = if ok.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (i0 as f64 / m, (ok.len() - i0) as f64 / m)
    };
    let mut beta_mean = vec![0.0; head];
    for rep in &ok {
        for (acc, b) in beta_mean.iter_mut().zip(&rep.beta_head) {
            *acc += b;
        }
    }
    beta_mean.iter_mut().for_each(|b| *b /= m);
    Ok(CellResult {
        cell: cell.clone(),
        replications: grid.replications,
        failures,
        metrics,
        freq_i0,
        freq_i1,
        beta_true,
        beta_mean,
        converged_fits: ok.iter().map(|r| r.converged_fits).sum(),
        kkt_passed: ok.iter().map(|r| r.kkt_passed).sum(),
        wall_time: clock.elapsed(),
    })
}

/// Runs all cells in order, calling `progress` after each one.
pub fn run_grid(
    grid: &ExperimentGrid,
    mut progress: impl FnMut(usize, usize, &CellResult),
) -> Result<Vec<CellResult>> {
    grid.validate()?;
    let cells = grid.cells();
    let mut out = Vec::with_capacity(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let res = run_cell(cell, grid)?;
        progress(i + 1, cells.len(), &res);
        out.push(res);
    }
    Ok(out)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn coordinates(c: &Cell) -> Vec<String> {
    vec![c.preset_label(), c.n.to_string(), c.p.to_string(), num(c.rho), num(c.gamma)]
}

/// A rendered output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub contents: String,
}

fn selection_table(file_name: &str, results: &[&CellResult]) -> Table {
    let header = [
        "preset", "n", "p", "rho", "gamma", "replications", "failures", "mean_fpr", "mean_fnr",
        "mean_fdr", "converged_fits", "kkt_passed",
    ];
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            let (fpr, fnr, fdr) = r
                .metrics
                .map_or((f64::NAN, f64::NAN, f64::NAN), |m| (m.mean_fpr, m.mean_fnr, m.mean_fdr));
            let mut row = coordinates(&r.cell);
            row.extend([
                r.replications.to_string(),
                r.failures.to_string(),
                num(fpr),
                num(fnr),
                num(fdr),
                r.converged_fits.to_string(),
                r.kkt_passed.to_string(),
            ]);
            row
        })
        .collect();
    Table {
        file_name: file_name.to_string(),
        contents: csv_text(&header, &rows),
    }
}

/// Selection tables per preset family, the coefficient table and the
/// detection table. Every value is a function of the grid and seeds alone.
pub fn render_tables(results: &[CellResult]) -> Vec<Table> {
    let mut tables = Vec::new();
    for (name, file) in [("strong", "table1_strong.csv"), ("weak", "table2_weak.csv"), ("custom", "selection_custom.csv")] {
        let group: Vec<&CellResult> = results.iter().filter(|r| r.cell.preset.name() == name).collect();
        if !group.is_empty() {
            tables.push(selection_table(file, &group));
        }
    }

    let header = ["preset", "n", "p", "rho", "gamma", "index", "beta_true", "beta_mean"];
    let mut rows = Vec::new();
    for r in results {
        for (j, (t, m)) in r.beta_true.iter().zip(&r.beta_mean).enumerate() {
            let mut row = coordinates(&r.cell);
            row.extend([(j + 1).to_string(), num(*t), num(*m)]);
            rows.push(row);
        }
    }
    tables.push(Table {
        file_name: "table3_coefficients.csv".into(),
        contents: csv_text(&header, &rows),
    });

    let header = ["preset", "n", "p", "rho", "gamma", "replications", "failures", "freq_i1", "freq_i0"];
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            let mut row = coordinates(&r.cell);
            row.extend([
                r.replications.to_string(),
                r.failures.to_string(),
                num(r.freq_i1),
                num(r.freq_i0),
            ]);
            row
        })
        .collect();
    tables.push(Table {
        file_name: "table4_detection.csv".into(),
        contents: csv_text(&header, &rows),
    });
    tables
}

/// Wall time per cell. Not reproducible, so kept out of the tables.
pub fn render_timings(results: &[CellResult]) -> Table {
    let header = ["preset", "n", "p", "rho", "gamma", "wall_seconds"];
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            let mut row = coordinates(&r.cell);
            row.push(num(r.wall_time.as_secs_f64()));
            row
        })
        .collect();
    Table {
        file_name: "timings.csv".into(),
        contents: csv_text(&header, &rows),
    }
}

/// Grid settings plus base seed, replication count and crate version.
pub fn render_manifest(grid: &ExperimentGrid) -> Table {
    let mut contents = String::new();
    let _ = writeln!(contents, "# sparse-coint Monte Carlo run");
    let mut kv = grid.to_kv();
    kv.insert("version", env!("CARGO_PKG_VERSION"));
    kv.insert("seed_mixing", "splitmix64");
    contents.push_str(&kv.render());
    Table {
        file_name: "manifest.txt".into(),
        contents,
    }
}
