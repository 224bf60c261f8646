//! Unit-root versus stationarity by information criteria.
//!
//! Two autoregressions are fitted to a residual series `z`:
//!
//! ```text
//! M0: Δz_t = μ +            Σ_{j≤k} φ_j Δz_{t−j} + ε_t     (unit root)
//! M1: Δz_t = μ + φ z_{t−1} + Σ_{j≤k} φ_j Δz_{t−j} + ε_t     (stationary)
//! ```
//!
//! on the common sample `t = k+2..n` (one-based), and compared with
//! `IC_i = ln σ̄²_i + c_n · params_i / n_eff`. M0 wins ties.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{solve_ols_columns, OlsFit};

/// Rule for the penalty `c_n` as a function of the effective sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum PenaltyRule {
    /// `ln n`.
    Bic,
    /// `c · ln n`.
    ScaledLog(f64),
    /// `√n`.
    Sqrt,
    /// A constant (not consistent; for experiments).
    Fixed(f64),
}

impl PenaltyRule {
    pub fn evaluate(&self, n_eff: usize) -> f64 {
        let n = n_eff as f64;
        match *self {
            PenaltyRule::Bic => n.ln(),
            PenaltyRule::ScaledLog(c) => c * n.ln(),
            PenaltyRule::Sqrt => n.sqrt(),
            PenaltyRule::Fixed(c) => c,
        }
    }
}

impl std::str::FromStr for PenaltyRule {
    type Err = Error;

    /// `bic`, `log:<c>`, `sqrt`, or `fixed:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("penalty", format!("unknown rule `{s}`"));
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b.parse::<f64>().map_err(|_| bad())?)),
            None => (s, None),
        };
        let rule = match (name, arg) {
            ("bic", None) => PenaltyRule::Bic,
            ("sqrt", None) => PenaltyRule::Sqrt,
            ("log", Some(c)) => PenaltyRule::ScaledLog(c),
            ("fixed", Some(c)) => PenaltyRule::Fixed(c),
            _ => return Err(bad()),
        };
        if rule.evaluate(10) <= 0.0 {
            return Err(Error::invalid("penalty", "must be positive"));
        }
        Ok(rule)
    }
}

impl std::fmt::Display for PenaltyRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PenaltyRule::Bic => f.write_str("bic"),
            PenaltyRule::ScaledLog(c) => write!(f, "log:{c}"),
            PenaltyRule::Sqrt => f.write_str("sqrt"),
            PenaltyRule::Fixed(c) => write!(f, "fixed:{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcSettings {
    /// Largest augmentation lag; `None` uses `⌊12 ((n−1)/100)^¼⌋` capped by the
    /// sample size.
    pub k_max: Option<usize>,
    pub penalty: PenaltyRule,
    pub include_intercept: bool,
}

impl Default for IcSettings {
    fn default() -> Self {
        Self {
            k_max: None,
            penalty: PenaltyRule::Bic,
            include_intercept: true,
        }
    }
}

impl IcSettings {
    pub fn resolve_k_max(&self, len: usize) -> Result<usize> {
        if len < 10 {
            return Err(Error::Dimension(format!("series of length {len} is too short")));
        }
        match self.k_max {
            Some(k) if len < k + 10 => Err(Error::invalid(
                "k_max",
                format!("{k} needs a series of length at least {}", k + 10),
            )),
            Some(k) => Ok(k),
            None => {
                let auto = (12.0 * ((len - 1) as f64 / 100.0).powf(0.25)).floor() as usize;
                Ok(auto.min(len - 10))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Residuals look I(0): M1 preferred.
    Cointegrated,
    /// Residuals look I(1): M0 preferred.
    Spurious,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Cointegrated => "cointegrated",
            Verdict::Spurious => "spurious",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcReport {
    pub k_hat: usize,
    pub sigma2_m0: f64,
    pub sigma2_m1: f64,
    pub ic0: f64,
    pub ic1: f64,
    pub c_n: f64,
    pub n_eff: usize,
    /// `n_eff · ln(σ̄²_0 / σ̄²_1)`.
    pub lr_statistic: f64,
    pub verdict: Verdict,
}

/// Regression of `Δz_t` on the optional constant, optional `z_{t−1}` and `k`
/// lagged differences for zero-based `t` in `start..len`.
fn difference_regression(
    z: &[f64],
    k: usize,
    start: usize,
    with_level: bool,
    include_intercept: bool,
) -> Result<OlsFit> {
    debug_assert!(start > k);
    let dz: Vec<f64> = (start..z.len()).map(|t| z[t] - z[t - 1]).collect();
    let mut cols = Vec::with_capacity(k + 1);
    if with_level {
        cols.push((start..z.len()).map(|t| z[t - 1]).collect());
    }
    for j in 1..=k {
        cols.push((start..z.len()).map(|t| z[t - j] - z[t - j - 1]).collect());
    }
    solve_ols_columns(&dz, &cols, include_intercept)
}

fn check_len(z: &[f64], k: usize) -> Result<()> {
    if z.len() < k + 10 {
        return Err(Error::Dimension(format!(
            "lag {k} needs at least {} observations, got {}",
            k + 10,
            z.len()
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("residual series"));
    }
    Ok(())
}

/// Unit-root model on `t = k+2..n`; `n_eff = n − 1 − k`.
pub fn fit_m0(z: &[f64], k: usize, include_intercept: bool) -> Result<OlsFit> {
    check_len(z, k)?;
    difference_regression(z, k, k + 1, false, include_intercept)
}

/// Stationary model on the same sample as [`fit_m0`]. The first coefficient
/// multiplies `z_{t−1}`.
pub fn fit_m1(z: &[f64], k: usize, include_intercept: bool) -> Result<OlsFit> {
    check_len(z, k)?;
    difference_regression(z, k, k + 1, true, include_intercept)
}

/// BIC lag choice on M1 over `k = 0..=k_max`, all on the sample aligned to
/// `k_max`. Ties go to the smaller lag.
pub fn select_lag_bic(z: &[f64], settings: &IcSettings) -> Result<usize> {
    let k_max = settings.resolve_k_max(z.len())?;
    check_len(z, k_max)?;
    let n_common = z.len() - 1 - k_max;
    let ln_n = (n_common as f64).ln();
    let mut best: Option<(f64, usize)> = None;
    for k in 0..=k_max {
        let fit = difference_regression(z, k, k_max + 1, true, settings.include_intercept)?;
        if !(fit.rss > 0.0) {
            return Err(Error::DegenerateRss(fit.rss));
        }
        let params = k + if settings.include_intercept { 2 } else { 1 };
        let bic = n_common as f64 * (fit.rss / n_common as f64).ln() + params as f64 * ln_n;
        if best.map_or(true, |(b, _)| bic < b) {
            best = Some((bic, k));
        }
    }
    Ok(best.map_or(0, |(_, k)| k))
}

/// Picks the lag by BIC, fits both models and applies the IC rule.
pub fn classify(z: &[f64], settings: &IcSettings) -> Result<IcReport> {
    let k = select_lag_bic(z, settings)?;
    classify_with_lag(z, k, settings)
}

/// `(IC_0, IC_1, c_n, verdict)` from the two variance estimates. With the
/// intercept on, M0 and M1 carry `k + 1` and `k + 2` parameters.
fn ic_rule(
    sigma2_m0: f64,
    sigma2_m1: f64,
    k: usize,
    n_eff: usize,
    settings: &IcSettings,
) -> (f64, f64, f64, Verdict) {
    let c_n = settings.penalty.evaluate(n_eff);
    let base = usize::from(settings.include_intercept);
    let (params0, params1) = (k + base, k + base + 1);
    let ic0 = sigma2_m0.ln() + c_n * params0 as f64 / n_eff as f64;
    let ic1 = sigma2_m1.ln() + c_n * params1 as f64 / n_eff as f64;
    let verdict = if ic0 <= ic1 {
        Verdict::Spurious
    } else {
        Verdict::Cointegrated
    };
    (ic0, ic1, c_n, verdict)
}

/// The IC comparison at a fixed lag.
pub fn classify_with_lag(z: &[f64], k: usize, settings: &IcSettings) -> Result<IcReport> {
    let m0 = fit_m0(z, k, settings.include_intercept)?;
    let m1 = fit_m1(z, k, settings.include_intercept)?;
    if !(m0.rss > 0.0) {
        return Err(Error::DegenerateRss(m0.rss));
    }
    if !(m1.rss > 0.0) {
        return Err(Error::DegenerateRss(m1.rss));
    }
    let n_eff = m0.n_eff;
    debug_assert_eq!(n_eff, z.len() - 1 - k);
    // M1 nests M0, so only rounding can put its RSS above M0's.
    debug_assert!(m1.rss <= m0.rss * (1.0 + 1e-10));
    let sigma2_m0 = m0.rss / n_eff as f64;
    let sigma2_m1 = m1.rss.min(m0.rss) / n_eff as f64;
    let (ic0, ic1, c_n, verdict) = ic_rule(sigma2_m0, sigma2_m1, k, n_eff, settings);
    let lr_statistic = n_eff as f64 * (sigma2_m0 / sigma2_m1).ln();
    debug_assert!(
        (lr_statistic > c_n) == (verdict == Verdict::Cointegrated)
            || (lr_statistic - c_n).abs() <= 1e-9 * c_n.abs().max(1.0),
        "IC rule and likelihood-ratio form disagree"
    );
    Ok(IcReport {
        k_hat: k,
        sigma2_m0,
        sigma2_m1,
        ic0,
        ic1,
        c_n,
        n_eff,
        lr_statistic,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn cumsum(v: &[f64]) -> Vec<f64> {
        v.iter()
            .scan(0.0, |s, x| {
                *s += x;
                Some(*s)
            })
            .collect()
    }

    #[test]
    fn m0_on_random_walk_recovers_step_variance() {
        let z = cumsum(&normals(1, 5000));
        let fit = fit_m0(&z, 0, true).unwrap();
        assert!((fit.sigma2() - 1.0).abs() < 0.1);
        assert_eq!(fit.n_eff, 4999);
    }

    #[test]
    fn linear_trend_is_degenerate() {
        let z: Vec<f64> = (0..50).map(|t| 0.5 * t as f64 + 3.0).collect();
        let fit = fit_m0(&z, 0, true).unwrap();
        assert!(fit.rss < 1e-20);
        assert!(matches!(
            classify_with_lag(&z, 0, &IcSettings::default()),
            Err(Error::DegenerateRss(_)) | Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn alternating_series_fits_exactly() {
        let z: Vec<f64> = (0..40).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let fit = fit_m0(&z, 1, false).unwrap();
        assert!((fit.coefficients[0] + 1.0).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn level_coefficient_limits() {
        let e = normals(2, 5000);
        let white = fit_m1(&e, 0, true).unwrap();
        assert!((white.coefficients[0] + 1.0).abs() < 0.05);
        let walk = fit_m1(&cumsum(&e), 0, true).unwrap();
        assert!(walk.coefficients[0].abs() < 0.05);
        assert!(walk.rss <= fit_m0(&cumsum(&e), 0, true).unwrap().rss);
    }

    #[test]
    fn k_max_zero_selects_zero() {
        let z = normals(3, 100);
        let s = IcSettings {
            k_max: Some(0),
            ..IcSettings::default()
        };
        assert_eq!(select_lag_bic(&z, &s).unwrap(), 0);
    }

    #[test]
    fn auto_k_max() {
        let s = IcSettings::default();
        assert_eq!(s.resolve_k_max(501).unwrap(), 17);
        assert_eq!(s.resolve_k_max(12).unwrap(), 2);
        let fixed = IcSettings {
            k_max: Some(5),
            ..s
        };
        assert!(fixed.resolve_k_max(14).is_err());
    }

    #[test]
    fn equal_variances_favour_unit_root() {
        for include_intercept in [true, false] {
            let s = IcSettings {
                include_intercept,
                ..IcSettings::default()
            };
            let (ic0, ic1, _, verdict) = ic_rule(1.7, 1.7, 3, 200, &s);
            assert!(ic0 < ic1);
            assert_eq!(verdict, Verdict::Spurious);
        }
    }

    #[test]
    fn penalty_rules() {
        assert_eq!("bic".parse::<PenaltyRule>().unwrap(), PenaltyRule::Bic);
        assert_eq!("log:2".parse::<PenaltyRule>().unwrap(), PenaltyRule::ScaledLog(2.0));
        assert_eq!("sqrt".parse::<PenaltyRule>().unwrap(), PenaltyRule::Sqrt);
        assert!("fixed:-1".parse::<PenaltyRule>().is_err());
        assert!("aic".parse::<PenaltyRule>().is_err());
        assert!((PenaltyRule::Bic.evaluate(100) - 100f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn intercept_flag_shifts_parameter_counts() {
        let z = normals(4, 300);
        let on = classify_with_lag(&z, 2, &IcSettings::default()).unwrap();
        let off = classify_with_lag(
            &z,
            2,
            &IcSettings {
                include_intercept: false,
                ..IcSettings::default()
            },
        )
        .unwrap();
        let pen_on = on.ic0 - on.sigma2_m0.ln();
        let pen_off = off.ic0 - off.sigma2_m0.ln();
        assert!((pen_on - on.c_n * 3.0 / on.n_eff as f64).abs() < 1e-12);
        assert!((pen_off - off.c_n * 2.0 / off.n_eff as f64).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn scale_invariance(seed in 0u64..500, a in 0.01f64..100.0, walk in proptest::bool::ANY) {
            let e = normals(seed, 200);
            let z = if walk { cumsum(&e) } else { e };
            let scaled: Vec<f64> = z.iter().map(|v| a * v).collect();
            let s = IcSettings::default();
            let r1 = classify(&z, &s).unwrap();
            let r2 = classify(&scaled, &s).unwrap();
            proptest::prop_assert_eq!(r1.k_hat, r2.k_hat);
            proptest::prop_assert_eq!(r1.verdict, r2.verdict);
        }
    }
}
