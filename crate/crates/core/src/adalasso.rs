//! Adaptive LASSO for the cointegrating regression.
//!
//! Minimises `Σ_t (y_t − β0 − x_tᵀβ)² + λ Σ_j w_j |β_j|` with the intercept
//! unpenalised. The intercept is profiled out by demeaning, so every solver
//! works on the Gram matrix of the centred design. Coordinate descent runs on
//! the rescaled design `x_j / w_j` with a common penalty and maps the result
//! back through `β_j = b_j / w_j`; [`fit_weighted_lasso_direct`] solves the
//! same problem with per-coordinate thresholds on the original design.

use serde::Serialize;

use crate::dgp::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, mean, sample_variance, solve_ols_columns, OlsFit};

/// Initial estimates below this magnitude get an infinite weight.
pub const EXCLUSION_THRESHOLD: f64 = 1e-12;

#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Adaptive penalty weights. An infinite weight excludes the coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    pub gamma: f64,
}

impl WeightVector {
    pub fn unit(p: usize) -> Self {
        Self {
            weights: vec![1.0; p],
            gamma: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_excluded(&self, j: usize) -> bool {
        self.weights[j].is_infinite()
    }
}

/// `w_j = 1 / |β̃_j|^γ` from an initial least-squares fit.
pub fn compute_weights(initial: &OlsFit, gamma: f64) -> Result<WeightVector> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    let weights = initial
        .coefficients
        .iter()
        .map(|b| {
            if b.abs() < EXCLUSION_THRESHOLD {
                f64::INFINITY
            } else {
                b.abs().powf(-gamma)
            }
        })
        .collect();
    Ok(WeightVector { weights, gamma })
}

/// Penalty grid; the effective values are `values[i] * scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    values: Vec<f64>,
    scale: f64,
}

impl LambdaGrid {
    pub fn new(values: Vec<f64>, scale: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("grid", "empty"));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("grid", "values must be positive"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid", "values must be strictly increasing"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid("grid_scale", "must be positive"));
        }
        Ok(Self { values, scale })
    }

    /// `count` values with base-10 exponents evenly spaced over `[lo, hi]`.
    pub fn logspace(lo: f64, hi: f64, count: usize, scale: f64) -> Result<Self> {
        let values = match count {
            0 => Vec::new(),
            1 => vec![10f64.powf(hi)],
            _ => (0..count)
                .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
                .collect(),
        };
        Self::new(values, scale)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        Self::new(self.values.clone(), scale)
    }

    /// Effective penalties, largest first.
    pub fn descending(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().rev().map(move |v| v * self.scale)
    }
}

impl Default for LambdaGrid {
    /// Ten values over `10^-1.5 ..= 10^0.5`, unit scale.
    fn default() -> Self {
        Self::logspace(-1.5, 0.5, 10, 1.0).expect("static grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Coefficient-change tolerance as a multiple of the sample sd of `y`.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_sweeps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveLassoFit {
    pub intercept: f64,
    pub beta: Vec<f64>,
    /// Zero-based support of `beta`.
    pub active_set: Vec<usize>,
    pub lambda: f64,
    pub weights: WeightVector,
    pub sweeps: usize,
    pub converged: bool,
    pub objective: f64,
}

impl AdaptiveLassoFit {
    /// `y − β0 − Xβ`.
    pub fn residuals(&self, ds: &Dataset) -> Vec<f64> {
        (0..ds.n())
            .map(|t| {
                let row = ds.x.row(t);
                let fitted: f64 = self
                    .active_set
                    .iter()
                    .map(|&j| row[j] * self.beta[j])
                    .sum();
                ds.y[t] - self.intercept - fitted
            })
            .collect()
    }

    pub fn rss(&self, ds: &Dataset) -> f64 {
        self.residuals(ds).iter().map(|r| r * r).sum()
    }

    /// `λ Σ_j w_j |β_j|`, skipping zero coefficients.
    pub fn penalty(&self) -> f64 {
        self.active_set
            .iter()
            .map(|&j| self.weights.weights[j] * self.beta[j].abs())
            .sum::<f64>()
            * self.lambda
    }
}

/// Centred cross-products of a dataset, shared across penalty values.
#[derive(Debug, Clone)]
pub struct CenteredGram {
    pub p: usize,
    pub x_mean: Vec<f64>,
    pub y_mean: f64,
    /// `X̃ᵀX̃`, row-major `p × p`.
    pub gram: Vec<f64>,
    /// `X̃ᵀỹ`.
    pub xty: Vec<f64>,
    pub yty: f64,
    pub y_sd: f64,
}

impl CenteredGram {
    pub fn new(ds: &Dataset) -> Self {
        let (n, p) = (ds.n(), ds.p());
        let x_mean: Vec<f64> = (0..p)
            .map(|j| (0..n).map(|t| ds.x.get(t, j)).sum::<f64>() / n as f64)
            .collect();
        let y_mean = mean(&ds.y);
        let mut gram = vec![0.0; p * p];
        let mut xty = vec![0.0; p];
        let mut yty = 0.0;
        let mut row = vec![0.0; p];
        for t in 0..n {
            for (r, (x, m)) in row.iter_mut().zip(ds.x.row(t).iter().zip(&x_mean)) {
                *r = x - m;
            }
            let yc = ds.y[t] - y_mean;
            yty += yc * yc;
            for i in 0..p {
                let ri = row[i];
                xty[i] += ri * yc;
                let g = &mut gram[i * p..i * p + i + 1];
                for (gk, rk) in g.iter_mut().zip(&row[..=i]) {
                    *gk += ri * rk;
                }
            }
        }
        for i in 0..p {
            for k in 0..i {
                gram[k * p + i] = gram[i * p + k];
            }
        }
        Self {
            p,
            x_mean,
            y_mean,
            gram,
            xty,
            yty,
            y_sd: sample_variance(&ds.y).sqrt(),
        }
    }

    fn abs_tol(&self, settings: &SolverSettings) -> f64 {
        let scale = if self.y_sd > 0.0 { self.y_sd } else { 1.0 };
        settings.tol * scale
    }
}

/// Smallest λ at which every slope is zero: `2 max_j |x̃_jᵀỹ| / w_j`.
pub fn lambda_max(gram: &CenteredGram, weights: &WeightVector) -> f64 {
    gram.xty
        .iter()
        .zip(&weights.weights)
        .filter(|(_, w)| w.is_finite())
        .map(|(c, w)| 2.0 * c.abs() / w)
        .fold(0.0, f64::max)
}

/// Quadratic problem `‖ỹ − Ab‖² + Σ_j pen_j |b_j|` in Gram form.
struct Quadratic<'a> {
    m: usize,
    gram: &'a [f64],
    xty: &'a [f64],
    yty: f64,
    pen: &'a [f64],
    /// Multiplier mapping a change in `b_j` to a change in `β_j`.
    coef_scale: &'a [f64],
}

impl Quadratic<'_> {
    fn objective(&self, b: &[f64], gb: &[f64]) -> f64 {
        let mut obj = self.yty;
        for j in 0..self.m {
            obj += b[j] * (gb[j] - 2.0 * self.xty[j]) + self.pen[j] * b[j].abs();
        }
        obj
    }

    fn gram_times(&self, b: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| {
                self.gram[i * self.m..(i + 1) * self.m]
                    .iter()
                    .zip(b)
                    .map(|(g, v)| g * v)
                    .sum()
            })
            .collect()
    }

    /// Solves the stationarity equations on the current support with the
    /// current signs; accepts only if signs and the inactive bounds hold.
    fn polish(&self, b: &[f64]) -> Option<Vec<f64>> {
        let support: Vec<usize> = (0..self.m).filter(|&j| b[j] != 0.0).collect();
        let mut candidate = vec![0.0; self.m];
        if !support.is_empty() {
            let k = support.len();
            let sub = crate::linalg::Matrix::from_fn(k, k, |a, c| {
                self.gram[support[a] * self.m + support[c]]
            })
            .ok()?;
            let l = cholesky(&sub).ok()?;
            let rhs: Vec<f64> = support
                .iter()
                .map(|&j| self.xty[j] - 0.5 * self.pen[j] * b[j].signum())
                .collect();
            let sol = cholesky_solve(&l, &rhs).ok()?;
            for (&j, v) in support.iter().zip(&sol) {
                if v.signum() != b[j].signum() || *v == 0.0 {
                    return None;
                }
                candidate[j] = *v;
            }
        }
        let gb = self.gram_times(&candidate);
        for j in 0..self.m {
            if candidate[j] == 0.0 {
                let grad = (self.xty[j] - gb[j]).abs();
                let bound = 0.5 * self.pen[j];
                if grad > bound + 1e-12 * (bound + self.xty[j].abs()) {
                    return None;
                }
            }
        }
        Some(candidate)
    }

    /// Optimality check at `b`, well inside the tolerance used by
    /// [`certify_kkt`] so that a converged fit always certifies.
    fn stationary(&self, b: &[f64], gb: &[f64]) -> bool {
        const STOP_TOL: f64 = 1e-9;
        let y_norm = self.yty.sqrt();
        (0..self.m).all(|j| {
            let g = self.xty[j] - gb[j];
            let half = 0.5 * self.pen[j];
            let allowance = STOP_TOL * self.gram[j * self.m + j].sqrt() * y_norm;
            if b[j] != 0.0 {
                (g - half * b[j].signum()).abs() <= allowance
            } else {
                g.abs() <= half + allowance
            }
        })
    }

    /// Cyclic coordinate descent from `b`; returns `(sweeps, converged)`.
    fn descend(&self, b: &mut [f64], tol: f64, max_sweeps: usize) -> (usize, bool) {
        let m = self.m;
        if m == 0 {
            return (0, true);
        }
        let mut gb = self.gram_times(b);
        let mut last_obj = self.objective(b, &gb);
        let mut stable_support = 0usize;
        for sweep in 1..=max_sweeps {
            let mut max_change = 0.0f64;
            let mut support_changed = false;
            for j in 0..m {
                let gjj = self.gram[j * m + j];
                if gjj <= 0.0 {
                    continue;
                }
                let old = b[j];
                let rho = self.xty[j] - gb[j] + gjj * old;
                let new = soft_threshold(rho, 0.5 * self.pen[j]) / gjj;
                let delta = new - old;
                if delta != 0.0 {
                    support_changed |= (old == 0.0) != (new == 0.0);
                    b[j] = new;
                    let col = &self.gram[j * m..(j + 1) * m];
                    for (g, c) in gb.iter_mut().zip(col) {
                        *g += delta * c;
                    }
                    max_change = max_change.max(delta.abs() * self.coef_scale[j]);
                }
            }
            if cfg!(debug_assertions) {
                let obj = self.objective(b, &gb);
                debug_assert!(
                    obj <= last_obj + 1e-9 * self.yty.max(1.0),
                    "objective rose from {last_obj} to {obj}"
                );
                last_obj = obj;
            }
            if max_change <= tol {
                gb = self.gram_times(b);
                if self.stationary(b, &gb) {
                    return (sweep, true);
                }
                if let Some(exact) = self.polish(b) {
                    b.copy_from_slice(&exact);
                    return (sweep, true);
                }
            }
            stable_support = if support_changed { 0 } else { stable_support + 1 };
            if stable_support >= 2 && stable_support % 8 == 2 {
                if let Some(exact) = self.polish(b) {
                    b.copy_from_slice(&exact);
                    return (sweep, true);
                }
            }
        }
        (max_sweeps, false)
    }
}

/// Which solver formulation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Formulation {
    Rescaled,
    Direct,
}

fn solve(
    gram: &CenteredGram,
    weights: &WeightVector,
    lambda: f64,
    settings: &SolverSettings,
    warm: Option<&[f64]>,
    form: Formulation,
) -> Result<AdaptiveLassoFit> {
    let p = gram.p;
    if weights.len() != p {
        return Err(Error::Dimension(format!(
            "{} weights for {p} covariates",
            weights.len()
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", "must be nonnegative"));
    }
    if let Some(w) = weights.weights.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::invalid("weights", format!("weight {w} is not positive")));
    }
    let kept: Vec<usize> = (0..p).filter(|&j| !weights.is_excluded(j)).collect();
    let m = kept.len();
    let w: Vec<f64> = kept.iter().map(|&j| weights.weights[j]).collect();
    let (scale, pen): (Vec<f64>, Vec<f64>) = match form {
        Formulation::Rescaled => (w.iter().map(|wj| 1.0 / wj).collect(), vec![lambda; m]),
        Formulation::Direct => (vec![1.0; m], w.iter().map(|wj| lambda * wj).collect()),
    };
    let mut sub_gram = vec![0.0; m * m];
    for (a, &ja) in kept.iter().enumerate() {
        for (c, &jc) in kept.iter().enumerate() {
            sub_gram[a * m + c] = gram.gram[ja * p + jc] * scale[a] * scale[c];
        }
    }
    let sub_xty: Vec<f64> = kept.iter().zip(&scale).map(|(&j, s)| gram.xty[j] * s).collect();
    let mut b: Vec<f64> = match warm {
        Some(beta) => kept.iter().zip(&scale).map(|(&j, s)| beta[j] / s).collect(),
        None => vec![0.0; m],
    };
    let problem = Quadratic {
        m,
        gram: &sub_gram,
        xty: &sub_xty,
        yty: gram.yty,
        pen: &pen,
        coef_scale: &scale,
    };
    let (sweeps, converged) = problem.descend(&mut b, gram.abs_tol(settings), settings.max_sweeps);

    let mut beta = vec![0.0; p];
    for ((&j, bj), s) in kept.iter().zip(&b).zip(&scale) {
        beta[j] = bj * s;
    }
    let active_set: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
    let intercept = gram.y_mean
        - active_set
            .iter()
            .map(|&j| gram.x_mean[j] * beta[j])
            .sum::<f64>();
    Ok(AdaptiveLassoFit {
        intercept,
        beta,
        active_set,
        lambda,
        weights: weights.clone(),
        sweeps,
        converged,
        objective: f64::NAN,
    })
}

fn finish(mut fit: AdaptiveLassoFit, ds: &Dataset) -> Result<AdaptiveLassoFit> {
    fit.objective = fit.rss(ds) + fit.penalty();
    if fit.converged {
        Ok(fit)
    } else {
        Err(Error::DidNotConverge(Box::new(fit)))
    }
}

/// Weighted LASSO via the rescaled design `x_j / w_j`.
pub fn fit_weighted_lasso(
    ds: &Dataset,
    weights: &WeightVector,
    lambda: f64,
    settings: &SolverSettings,
) -> Result<AdaptiveLassoFit> {
    let gram = CenteredGram::new(ds);
    fit_with_gram(ds, &gram, weights, lambda, settings, None)
}

/// [`fit_weighted_lasso`] with precomputed cross-products and an optional
/// warm start (a full-length `β`).
pub fn fit_with_gram(
    ds: &Dataset,
    gram: &CenteredGram,
    weights: &WeightVector,
    lambda: f64,
    settings: &SolverSettings,
    warm: Option<&[f64]>,
) -> Result<AdaptiveLassoFit> {
    if ds.n() <= ds.p() + 1 {
        log::warn!("weighted lasso with n = {} <= p + 1 = {}", ds.n(), ds.p() + 1);
    }
    let fit = solve(gram, weights, lambda, settings, warm, Formulation::Rescaled)?;
    finish(fit, ds)
}

/// Weighted LASSO with per-coordinate thresholds `λ w_j` on the original design.
pub fn fit_weighted_lasso_direct(
    ds: &Dataset,
    weights: &WeightVector,
    lambda: f64,
    settings: &SolverSettings,
) -> Result<AdaptiveLassoFit> {
    let gram = CenteredGram::new(ds);
    let fit = solve(&gram, weights, lambda, settings, None, Formulation::Direct)?;
    finish(fit, ds)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CoordinateSlack {
    /// One-based covariate index.
    pub index: usize,
    pub active: bool,
    pub gradient: f64,
    /// Active: `|g − ½λw sign β|`. Inactive: `½λw − |g|`.
    pub slack: f64,
    pub allowance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct KktReport {
    pub pass: bool,
    pub coordinates: Vec<CoordinateSlack>,
}

/// Checks the optimality conditions at a fit.
///
/// With `g_j = Σ_t x̃_jt (ỹ_t − x̃_tᵀβ)` on centred data, active coordinates
/// need `g_j = ½ λ w_j sign(β_j)` and inactive ones `|g_j| ≤ ½ λ w_j`, each up
/// to `tol · ‖x̃_j‖ ‖ỹ‖`. Excluded coordinates are skipped.
pub fn certify_kkt(fit: &AdaptiveLassoFit, ds: &Dataset, tol: f64) -> KktReport {
    let resid = fit.residuals(ds);
    let r_mean = mean(&resid);
    let y_mean = mean(&ds.y);
    let y_norm = ds.y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>().sqrt();
    let mut coordinates = Vec::new();
    for j in 0..ds.p() {
        let w = fit.weights.weights[j];
        if w.is_infinite() {
            continue;
        }
        let col = ds.x.column(j);
        let xm = mean(&col);
        let mut g = 0.0;
        let mut xx = 0.0;
        for (x, r) in col.iter().zip(&resid) {
            g += (x - xm) * (r - r_mean);
            xx += (x - xm) * (x - xm);
        }
        let allowance = tol * (xx.sqrt() * y_norm).max(f64::MIN_POSITIVE);
        let half = 0.5 * fit.lambda * w;
        let active = fit.beta[j] != 0.0;
        let (slack, ok) = if active {
            let s = (g - half * fit.beta[j].signum()).abs();
            (s, s <= allowance)
        } else {
            let s = half - g.abs();
            (s, s >= -allowance)
        };
        coordinates.push(CoordinateSlack {
            index: j + 1,
            active,
            gradient: g,
            slack,
            allowance,
            ok,
        });
    }
    KktReport {
        pass: coordinates.iter().all(|c| c.ok),
        coordinates,
    }
}

/// `n ln(RSS/n) + |Ŝ| ln n` with RSS from the direct residuals.
pub fn bic_of_fit(fit: &AdaptiveLassoFit, ds: &Dataset) -> Result<f64> {
    bic_value(fit.rss(ds), ds.n(), fit.active_set.len())
}

pub(crate) fn bic_value(rss: f64, n: usize, k: usize) -> Result<f64> {
    if !(rss > 0.0) {
        return Err(Error::DegenerateRss(rss));
    }
    let nf = n as f64;
    Ok(nf * (rss / nf).ln() + k as f64 * nf.ln())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BicRow {
    pub lambda: f64,
    /// `None` when the fit failed or its RSS was degenerate.
    pub bic: Option<f64>,
    pub active: usize,
    pub converged: bool,
}

/// Fits the grid from the largest penalty down, warm starting each point from
/// the previous solution, and returns the BIC minimiser. Ties go to the larger
/// penalty.
pub fn select_lambda_bic(
    ds: &Dataset,
    weights: &WeightVector,
    grid: &LambdaGrid,
    settings: &SolverSettings,
) -> Result<(AdaptiveLassoFit, Vec<BicRow>)> {
    let gram = CenteredGram::new(ds);
    select_lambda_bic_with_gram(ds, &gram, weights, grid, settings)
}

pub fn select_lambda_bic_with_gram(
    ds: &Dataset,
    gram: &CenteredGram,
    weights: &WeightVector,
    grid: &LambdaGrid,
    settings: &SolverSettings,
) -> Result<(AdaptiveLassoFit, Vec<BicRow>)> {
    let path = lambda_path_with_gram(ds, gram, weights, grid, settings)?;
    let (best, table) = select_from_path(&path, ds)?;
    Ok((path[best].fit.clone(), table))
}

/// One grid point of a warm-started path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub fit: AdaptiveLassoFit,
    pub converged: bool,
}

/// Fits every grid value from the largest down, warm starting each from the
/// previous solution. Non-converged points are kept and marked.
pub fn lambda_path_with_gram(
    ds: &Dataset,
    gram: &CenteredGram,
    weights: &WeightVector,
    grid: &LambdaGrid,
    settings: &SolverSettings,
) -> Result<Vec<PathPoint>> {
    let mut warm: Option<Vec<f64>> = None;
    let mut path = Vec::with_capacity(grid.values().len());
    for lambda in grid.descending() {
        let point = match fit_with_gram(ds, gram, weights, lambda, settings, warm.as_deref()) {
            Ok(fit) => PathPoint { fit, converged: true },
            Err(Error::DidNotConverge(partial)) => {
                log::warn!("lambda {lambda:e} did not converge; excluded from selection");
                PathPoint {
                    fit: *partial,
                    converged: false,
                }
            }
            Err(e) => return Err(e),
        };
        warm = Some(point.fit.beta.clone());
        path.push(point);
    }
    Ok(path)
}

/// Index of the BIC minimiser among converged points of a descending path
/// (ties to the larger penalty), plus the table in ascending `λ` order.
pub fn select_from_path(path: &[PathPoint], ds: &Dataset) -> Result<(usize, Vec<BicRow>)> {
    let mut best: Option<(f64, usize)> = None;
    let mut table = Vec::with_capacity(path.len());
    for (i, point) in path.iter().enumerate() {
        let bic = if point.converged { bic_of_fit(&point.fit, ds).ok() } else { None };
        table.push(BicRow {
            lambda: point.fit.lambda,
            bic,
            active: point.fit.active_set.len(),
            converged: point.converged,
        });
        if let Some(b) = bic {
            if best.map_or(true, |(bb, _)| b < bb) {
                best = Some((b, i));
            }
        }
    }
    table.reverse();
    best.map(|(_, i)| (i, table)).ok_or(Error::NoUsableLambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    Direct,
    PostOls,
}

impl std::str::FromStr for ResidualMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(ResidualMode::Direct),
            "post_ols" | "post-ols" => Ok(ResidualMode::PostOls),
            other => Err(Error::invalid("residual_mode", format!("unknown mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for ResidualMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ResidualMode::Direct => "direct",
            ResidualMode::PostOls => "post_ols",
        })
    }
}

/// Equilibrium-error estimates from a fit.
///
/// `PostOls` refits `y` on the selected covariates with an intercept; with no
/// covariates selected this is demeaned `y`.
pub fn residuals_al(fit: &AdaptiveLassoFit, ds: &Dataset, mode: ResidualMode) -> Result<Vec<f64>> {
    match mode {
        ResidualMode::Direct => Ok(fit.residuals(ds)),
        ResidualMode::PostOls => {
            let cols: Vec<Vec<f64>> = fit.active_set.iter().map(|&j| ds.x.column(j)).collect();
            solve_ols_columns(&ds.y, &cols, true)
                .map(|ols| ols.residuals)
                .map_err(|e| match e {
                    Error::RankDeficient { column } => Error::RankDeficient {
                        column: fit.active_set[column],
                    },
                    other => other,
                })
        }
    }
}

/// Serialisable view of a fit, with one-based indices.
#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub intercept: f64,
    pub beta: Vec<f64>,
    pub active_set: Vec<usize>,
    pub lambda: f64,
    pub gamma: f64,
    /// `null` marks an excluded coefficient.
    pub weights: Vec<Option<f64>>,
    pub sweeps: usize,
    pub converged: bool,
    pub objective: f64,
    pub bic_table: Vec<BicRow>,
}

impl FitRecord {
    pub fn new(fit: &AdaptiveLassoFit, bic_table: &[BicRow]) -> Self {
        Self {
            intercept: fit.intercept,
            beta: fit.beta.clone(),
            active_set: fit.active_set.iter().map(|j| j + 1).collect(),
            lambda: fit.lambda,
            gamma: fit.weights.gamma,
            weights: fit
                .weights
                .weights
                .iter()
                .map(|w| w.is_finite().then_some(*w))
                .collect(),
            sweeps: fit.sweeps,
            converged: fit.converged,
            objective: fit.objective,
            bic_table: bic_table.to_vec(),
        }
    }
}
