//! The two-step detector: adaptive-LASSO selection, then IC classification
//! of the cointegrating residuals.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::adalasso::{
    compute_weights, lambda_path_with_gram, residuals_al, select_from_path, AdaptiveLassoFit,
    BicRow, CenteredGram, FitRecord, LambdaGrid, PathPoint, ResidualMode, SolverSettings,
};
use crate::dgp::Dataset;
use crate::error::{Error, Result, Stage};
use crate::linalg::solve_ols;
use crate::stationarity::{classify, IcReport, IcSettings, Verdict};

/// How grid values map to the penalty `λ` on the unnormalised objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaUnits {
    /// `λ = value · scale`.
    Raw,
    /// `λ = 2n · value · scale`, the units of solvers that minimise
    /// `RSS / (2n) + λ Σ|β|`.
    PerObservation,
}

impl std::str::FromStr for LambdaUnits {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(LambdaUnits::Raw),
            "per_observation" | "per-observation" => Ok(LambdaUnits::PerObservation),
            other => Err(Error::invalid("lambda_units", format!("unknown units `{other}`"))),
        }
    }
}

impl std::fmt::Display for LambdaUnits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LambdaUnits::Raw => "raw",
            LambdaUnits::PerObservation => "per_observation",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub gamma: f64,
    pub grid: LambdaGrid,
    pub lambda_units: LambdaUnits,
    pub residual_mode: ResidualMode,
    pub ic: IcSettings,
    pub solver: SolverSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            grid: LambdaGrid::default(),
            lambda_units: LambdaUnits::PerObservation,
            residual_mode: ResidualMode::PostOls,
            ic: IcSettings::default(),
            solver: SolverSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// The grid in units of the unnormalised objective for a sample of size `n`.
    pub fn effective_grid(&self, n: usize) -> Result<LambdaGrid> {
        match self.lambda_units {
            LambdaUnits::Raw => Ok(self.grid.clone()),
            LambdaUnits::PerObservation => self.grid.with_scale(self.grid.scale() * 2.0 * n as f64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be positive"));
        }
        if !(self.solver.tol >= 0.0) || self.solver.max_sweeps == 0 {
            return Err(Error::invalid("solver", "tol must be >= 0 and max_sweeps > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub fit: AdaptiveLassoFit,
    pub bic_table: Vec<BicRow>,
    /// Every grid fit, largest penalty first.
    pub path: Vec<PathPoint>,
    pub residual_mode: ResidualMode,
    /// The series handed to the classifier.
    pub residuals: Vec<f64>,
    pub ic: IcReport,
    /// Zero-based; equal to `fit.active_set`.
    pub selected_covariates: Vec<usize>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub initial_ols: Duration,
    pub lambda_selection: Duration,
    pub residuals: Duration,
    pub classification: Duration,
}

/// Runs both steps on `ds`.
pub fn detect(ds: &Dataset, config: &PipelineConfig) -> Result<DetectionResult> {
    detect_timed(ds, config).map(|(r, _)| r)
}

/// [`detect`] plus wall time per stage.
pub fn detect_timed(ds: &Dataset, config: &PipelineConfig) -> Result<(DetectionResult, StageTimings)> {
    config.validate()?;
    let (n, p) = (ds.n(), ds.p());
    if n <= p + 1 {
        return Err(Error::InitialOlsInfeasible { n, p });
    }
    let mut timings = StageTimings::default();

    let clock = Instant::now();
    let initial = solve_ols(&ds.y, &ds.x, true).map_err(|e| e.at(Stage::InitialOls))?;
    let weights = compute_weights(&initial, config.gamma).map_err(|e| e.at(Stage::Weights))?;
    timings.initial_ols = clock.elapsed();

    let clock = Instant::now();
    let grid = config
        .effective_grid(n)
        .map_err(|e| e.at(Stage::LambdaSelection))?;
    let gram = CenteredGram::new(ds);
    let path = lambda_path_with_gram(ds, &gram, &weights, &grid, &config.solver)
        .map_err(|e| e.at(Stage::LambdaSelection))?;
    let (best, bic_table) = select_from_path(&path, ds).map_err(|e| e.at(Stage::LambdaSelection))?;
    let fit = path[best].fit.clone();
    timings.lambda_selection = clock.elapsed();

    let clock = Instant::now();
    let residuals =
        residuals_al(&fit, ds, config.residual_mode).map_err(|e| e.at(Stage::Residuals))?;
    timings.residuals = clock.elapsed();

    let clock = Instant::now();
    let ic = classify(&residuals, &config.ic).map_err(|e| e.at(Stage::Classification))?;
    timings.classification = clock.elapsed();

    let result = DetectionResult {
        selected_covariates: fit.active_set.clone(),
        verdict: ic.verdict,
        fit,
        bic_table,
        path,
        residual_mode: config.residual_mode,
        residuals,
        ic,
    };
    Ok((result, timings))
}

/// Exported view of a detection, one-based indices.
#[derive(Debug, Clone, Serialize)]
pub struct DetectionRecord {
    pub verdict: Verdict,
    pub selected_covariates: Vec<usize>,
    pub residual_mode: ResidualMode,
    pub fit: FitRecord,
    pub ic: IcReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_seconds: Option<TimingRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingRecord {
    pub initial_ols: f64,
    pub lambda_selection: f64,
    pub residuals: f64,
    pub classification: f64,
}

impl DetectionRecord {
    pub fn new(result: &DetectionResult, timings: Option<&StageTimings>) -> Self {
        Self {
            verdict: result.verdict,
            selected_covariates: result.selected_covariates.iter().map(|j| j + 1).collect(),
            residual_mode: result.residual_mode,
            fit: FitRecord::new(&result.fit, &result.bic_table),
            ic: result.ic.clone(),
            timings_seconds: timings.map(|t| TimingRecord {
                initial_ols: t.initial_ols.as_secs_f64(),
                lambda_selection: t.lambda_selection.as_secs_f64(),
                residuals: t.residuals.as_secs_f64(),
                classification: t.classification.as_secs_f64(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{simulate, DgpConfig, SignalPreset};
    use crate::linalg::Matrix;

    #[test]
    fn square_design_is_infeasible() {
        let x = Matrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64).unwrap();
        let ds = Dataset::new(vec![1.0; 6], x).unwrap();
        assert!(matches!(
            detect(&ds, &PipelineConfig::default()),
            Err(Error::InitialOlsInfeasible { n: 6, p: 6 })
        ));
    }

    #[test]
    fn deterministic_and_stage_consistent() {
        let ds = simulate(&DgpConfig::simulation_design(&SignalPreset::Strong, 200, 10, 0.0, 5)).unwrap();
        let cfg = PipelineConfig::default();
        let a = detect(&ds, &cfg).unwrap();
        let b = detect(&ds, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.selected_covariates, a.fit.active_set);
        assert_eq!(a.verdict, a.ic.verdict);
        let again = residuals_al(&a.fit, &ds, cfg.residual_mode).unwrap();
        assert_eq!(again, a.residuals);
        assert_eq!(classify(&a.residuals, &cfg.ic).unwrap(), a.ic);
    }

    #[test]
    fn per_observation_units_scale_with_n() {
        let cfg = PipelineConfig::default();
        let g = cfg.effective_grid(250).unwrap();
        assert_eq!(g.scale(), 500.0);
        let raw = PipelineConfig {
            lambda_units: LambdaUnits::Raw,
            ..cfg
        };
        assert_eq!(raw.effective_grid(250).unwrap().scale(), 1.0);
    }

    #[test]
    fn errors_carry_stage() {
        let ds = simulate(&DgpConfig::simulation_design(&SignalPreset::Custom(vec![1.0, 0.5]), 40, 3, 0.0, 1)).unwrap();
        let cfg = PipelineConfig {
            ic: IcSettings {
                k_max: Some(35),
                ..IcSettings::default()
            },
            ..PipelineConfig::default()
        };
        match detect(&ds, &cfg) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, Stage::Classification),
            other => panic!("{other:?}"),
        }
    }
}
