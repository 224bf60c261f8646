//! Detection of sparse cointegration.
//!
//! A two-step procedure: the adaptive LASSO picks the covariates that enter
//! the cointegrating regression, then an information criterion decides whether
//! the fitted residuals behave like a stationary series (cointegration) or a
//! unit-root one (spurious regression). A seeded simulator and a Monte Carlo
//! harness measure selection accuracy and detection frequencies.
//!
//! Index sets are zero-based in the API and one-based in every exported
//! record or file.

pub mod adalasso;
pub mod cli;
pub mod dgp;
pub mod error;
pub mod harness;
pub mod io;
pub mod kv;
pub mod linalg;
pub mod stationarity;

pub use error::{Error, Result};
pub mod metrics;
pub mod pipeline;
