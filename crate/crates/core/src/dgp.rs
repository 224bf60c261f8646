//! Seeded simulation of sparsely cointegrated systems.
//!
//! The generated system is
//!
//! ```text
//! y_t   = β0 + Σ_{j<s} β_j x_{j,t} + z_t
//! x_j,t = x_j,t-1 + v_j,t              x_j,0 = 0
//! z_t   = ρ z_t-1 + e_t                z_0   = 0
//! (e_t, v_1t, …, v_pt) ~ NID(0, Ω)
//! ```
//!
//! with `Ω = [[σ²_e, ω_evᵀ], [ω_ev, Ω_vv]]`, `[Ω_vv]_ij = c^|i-j|` and every
//! entry of `ω_ev` equal to `τ · min diag(Ω_vv)`.
//!
//! Draws come from ChaCha20 seeded with the config seed; standard normals use
//! the Ziggurat sampler of `rand_distr::StandardNormal`. Each time step
//! consumes `p + 1` normals in the order `e, v_1, …, v_p`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kv::{self, KvMap};
use crate::linalg::{cholesky, cholesky_solve, dot, Matrix};

/// Active-coefficient presets.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalPreset {
    /// β_S = (1, 0.5, 1.5, 0.8, 1).
    Strong,
    /// β_S = (0.25, …, 0.25), five entries.
    Weak,
    Custom(Vec<f64>),
}

impl SignalPreset {
    pub fn coefficients(&self) -> Vec<f64> {
        match self {
            SignalPreset::Strong => vec![1.0, 0.5, 1.5, 0.8, 1.0],
            SignalPreset::Weak => vec![0.25; 5],
            SignalPreset::Custom(b) => b.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SignalPreset::Strong => "strong",
            SignalPreset::Weak => "weak",
            SignalPreset::Custom(_) => "custom",
        }
    }
}

impl std::str::FromStr for SignalPreset {
    type Err = Error;

    /// `strong`, `weak`, or a `;`-separated coefficient vector.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "strong" => Ok(SignalPreset::Strong),
            "weak" => Ok(SignalPreset::Weak),
            other => other
                .split(';')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(SignalPreset::Custom)
                .map_err(|_| Error::invalid("signal_preset", format!("cannot parse `{other}`"))),
        }
    }
}

/// What to do when the requested endogeneity makes Ω indefinite.
///
/// With `σ²_e = 4`, `c = 0.5` and `τ = 1` the share of `var(e)` explained by
/// `v` is `(p + 2) / 12`, so Ω is singular at `p = 10` and indefinite beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndogeneityPolicy {
    /// Use ω_ev as given; construction fails unless Ω is positive definite.
    Exact,
    /// Scale ω_ev down, keeping its equal-entry shape, so that the R² of
    /// `e_t` on `v_t` does not exceed `max_r2`.
    Shrink { max_r2: f64 },
}

impl EndogeneityPolicy {
    pub const DEFAULT_SHRINK: EndogeneityPolicy = EndogeneityPolicy::Shrink { max_r2: 0.9 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpConfig {
    pub n: usize,
    pub p: usize,
    pub beta0: f64,
    /// Coefficients of the first `s = beta_active.len()` covariates.
    pub beta_active: Vec<f64>,
    pub rho: f64,
    pub sigma2_e: f64,
    pub corr_decay: f64,
    pub tau: f64,
    pub endogeneity: EndogeneityPolicy,
    pub seed: u64,
}

impl DgpConfig {
    /// The simulation design with σ²_e = 4, Toeplitz base 0.5, τ = 1 and ω_ev
    /// shrunk where the literal Ω would be indefinite.
    pub fn simulation_design(preset: &SignalPreset, n: usize, p: usize, rho: f64, seed: u64) -> Self {
        Self {
            n,
            p,
            beta0: 0.0,
            beta_active: preset.coefficients(),
            rho,
            sigma2_e: 4.0,
            corr_decay: 0.5,
            tau: 1.0,
            endogeneity: EndogeneityPolicy::DEFAULT_SHRINK,
            seed,
        }
    }

    pub fn s(&self) -> usize {
        self.beta_active.len()
    }

    /// Checks the scalar invariants and that Ω factorises.
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::invalid("n", "need at least 3 observations"));
        }
        if self.p == 0 {
            return Err(Error::invalid("p", "need at least one covariate"));
        }
        if self.beta_active.is_empty() || self.beta_active.len() > self.p {
            return Err(Error::invalid("beta_active", "need 1 <= s <= p coefficients"));
        }
        if self.beta_active.iter().any(|b| !b.is_finite()) || !self.beta0.is_finite() {
            return Err(Error::invalid("beta_active", "coefficients must be finite"));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::invalid("rho", format!("{} is outside [0, 1]", self.rho)));
        }
        if !(self.sigma2_e > 0.0 && self.sigma2_e.is_finite()) {
            return Err(Error::invalid("sigma2_e", "must be positive"));
        }
        if !(self.corr_decay > 0.0 && self.corr_decay < 1.0) {
            return Err(Error::invalid("corr_decay", "must lie in (0, 1)"));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid("tau", "must be nonnegative"));
        }
        if let EndogeneityPolicy::Shrink { max_r2 } = self.endogeneity {
            if !(max_r2 >= 0.0 && max_r2 < 1.0) {
                return Err(Error::invalid("max_r2", "must lie in [0, 1)"));
            }
        }
        build_omega(self).map(|_| ())
    }

    pub const KEYS: [&'static str; 11] = [
        "n",
        "p",
        "beta0",
        "beta_active",
        "rho",
        "sigma2_e",
        "corr_decay",
        "tau",
        "endogeneity",
        "max_r2",
        "seed",
    ];

    /// Reads a config. `endogeneity` is `exact` or `shrink` (default), with
    /// `max_r2` for the latter; `beta_active` also accepts `strong`/`weak`.
    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        kv.reject_unknown(&[&Self::KEYS[..], &["true_active"]].concat())?;
        let beta_active = match kv.raw("beta_active") {
            Some("strong") => SignalPreset::Strong.coefficients(),
            Some("weak") => SignalPreset::Weak.coefficients(),
            Some(_) => kv.get_list("beta_active")?.unwrap_or_default(),
            None => return Err(Error::invalid("beta_active", "missing")),
        };
        let endogeneity = match kv.raw("endogeneity").unwrap_or("shrink") {
            "exact" => EndogeneityPolicy::Exact,
            "shrink" => EndogeneityPolicy::Shrink {
                max_r2: kv.get_or("max_r2", 0.9)?,
            },
            other => {
                return Err(Error::invalid("endogeneity", format!("unknown policy `{other}`")))
            }
        };
        let cfg = Self {
            n: kv.require("n")?,
            p: kv.require("p")?,
            beta0: kv.get_or("beta0", 0.0)?,
            beta_active,
            rho: kv.require("rho")?,
            sigma2_e: kv.get_or("sigma2_e", 4.0)?,
            corr_decay: kv.get_or("corr_decay", 0.5)?,
            tau: kv.get_or("tau", 1.0)?,
            endogeneity,
            seed: kv.get_or("seed", 0)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv(&self) -> KvMap {
        let mut kv = KvMap::default();
        kv.insert("n", self.n);
        kv.insert("p", self.p);
        kv.insert("beta0", self.beta0);
        kv.insert("beta_active", kv::join(&self.beta_active));
        kv.insert("rho", self.rho);
        kv.insert("sigma2_e", self.sigma2_e);
        kv.insert("corr_decay", self.corr_decay);
        kv.insert("tau", self.tau);
        match self.endogeneity {
            EndogeneityPolicy::Exact => kv.insert("endogeneity", "exact"),
            EndogeneityPolicy::Shrink { max_r2 } => {
                kv.insert("endogeneity", "shrink");
                kv.insert("max_r2", max_r2);
            }
        }
        kv.insert("seed", self.seed);
        kv
    }
}

/// Observed sample plus optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub y: Vec<f64>,
    pub x: Matrix,
    /// Zero-based indices of the truly active covariates.
    pub true_active: Option<Vec<usize>>,
    pub z_true: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(y: Vec<f64>, x: Matrix) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::Dimension(format!(
                "y has {} observations, x has {} rows",
                y.len(),
                x.rows()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("y"));
        }
        Ok(Self {
            y,
            x,
            true_active: None,
            z_true: None,
        })
    }

    pub fn with_truth(mut self, true_active: Vec<usize>) -> Result<Self> {
        if true_active.iter().any(|&j| j >= self.p()) {
            return Err(Error::Dimension("true_active index out of range".into()));
        }
        self.true_active = Some(true_active);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }
}

fn toeplitz_vv(cfg: &DgpConfig) -> Result<Matrix> {
    Matrix::from_fn(cfg.p, cfg.p, |i, j| {
        cfg.corr_decay.powi((i as i32 - j as i32).abs())
    })
}

/// Entry of ω_ev after the endogeneity policy is applied.
pub fn effective_omega_ev(cfg: &DgpConfig) -> Result<f64> {
    let vv = toeplitz_vv(cfg)?;
    let min_diag = (0..cfg.p).map(|i| vv.get(i, i)).fold(f64::INFINITY, f64::min);
    let entry = cfg.tau * min_diag;
    match cfg.endogeneity {
        EndogeneityPolicy::Exact => Ok(entry),
        EndogeneityPolicy::Shrink { max_r2 } => {
            if entry == 0.0 {
                return Ok(0.0);
            }
            let l = cholesky(&vv)?;
            let ones = vec![1.0; cfg.p];
            let quad = dot(&ones, &cholesky_solve(&l, &ones)?);
            let r2 = entry * entry * quad / cfg.sigma2_e;
            Ok(if r2 > max_r2 {
                entry * (max_r2 / r2).sqrt()
            } else {
                entry
            })
        }
    }
}

/// Covariance of `(e_t, v_1t, …, v_pt)`; fails if it is not positive definite.
pub fn build_omega(cfg: &DgpConfig) -> Result<Matrix> {
    let vv = toeplitz_vv(cfg)?;
    let ev = effective_omega_ev(cfg)?;
    let m = cfg.p + 1;
    let omega = Matrix::from_fn(m, m, |i, j| match (i, j) {
        (0, 0) => cfg.sigma2_e,
        (0, _) | (_, 0) => ev,
        _ => vv.get(i - 1, j - 1),
    })?;
    cholesky(&omega)?;
    Ok(omega)
}

/// Draws a dataset. Identical configs give bit-identical datasets.
pub fn simulate(cfg: &DgpConfig) -> Result<Dataset> {
    cfg.validate()?;
    let omega = build_omega(cfg)?;
    let chol = cholesky(&omega)?;
    let (n, p, m) = (cfg.n, cfg.p, cfg.p + 1);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);

    let mut xi = vec![0.0; m];
    let mut level = vec![0.0; p];
    let mut z_prev = 0.0;
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        for v in xi.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let e = dot(&chol.row(0)[..1], &xi[..1]);
        for j in 0..p {
            let row = chol.row(j + 1);
            level[j] += dot(&row[..=j + 1], &xi[..=j + 1]);
        }
        let zt = cfg.rho * z_prev + e;
        z_prev = zt;
        let signal: f64 = cfg
            .beta_active
            .iter()
            .zip(&level)
            .map(|(b, xv)| b * xv)
            .sum();
        y.push(cfg.beta0 + signal + zt);
        z.push(zt);
        x.extend_from_slice(&level);
    }
    let mut ds = Dataset::new(y, Matrix::new(n, p, x)?)?.with_truth((0..cfg.s()).collect())?;
    ds.z_true = Some(z);
    Ok(ds)
}
