use std::fmt;

use crate::adalasso::AdaptiveLassoFit;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage in which an error surfaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    InitialOls,
    Weights,
    LambdaSelection,
    Residuals,
    Classification,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::InitialOls => "initial-ols",
            Stage::Weights => "weights",
            Stage::LambdaSelection => "lambda-selection",
            Stage::Residuals => "residuals",
            Stage::Classification => "classification",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("design is rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("coordinate descent did not converge after {} sweeps", .0.sweeps)]
    DidNotConverge(Box<AdaptiveLassoFit>),

    #[error("residual sum of squares is not positive ({0:e})")]
    DegenerateRss(f64),

    #[error("initial OLS needs n > p + 1 (n = {n}, p = {p})")]
    InitialOlsInfeasible { n: usize, p: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("every lambda in the grid failed")]
    NoUsableLambda,

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at(self, stage: Stage) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
