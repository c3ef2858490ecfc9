use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

use crate::mcmc::Diagnostics;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised while reading input files.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}: {message}")]
    Row {
        path: PathBuf,
        row: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Input(#[from] InputError),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sampler failed to converge (max split-R-hat {:.3})", .0.max_rhat())]
    Convergence(Box<Diagnostics>),

    #[error("no posterior draws available")]
    EmptyPosterior,

    #[error("all simulated trajectories were empty over the horizon; try a longer horizon or larger prevalence")]
    AllSimulationsEmpty,

    #[error("{0}")]
    Fit(String),

    #[error("fit failed for decision date {date}: {source}")]
    AtDate {
        date: NaiveDate,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_date(self, date: NaiveDate) -> Self {
        match self {
            e @ Error::AtDate { .. } => e,
            e => Error::AtDate {
                date,
                source: Box::new(e),
            },
        }
    }

    /// True for problems with the caller's inputs, as opposed to model failures.
    pub fn is_input(&self) -> bool {
        match self {
            Error::Input(_) | Error::Config(_) | Error::Domain(_) => true,
            Error::AtDate { source, .. } => source.is_input(),
            _ => false,
        }
    }
}
