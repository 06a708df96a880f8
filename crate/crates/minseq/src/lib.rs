//! Sequential testing of the minimum mean of a set of exponential-family arms.
//!
//! Given `K` arms with unknown means and a threshold `gamma`, the library
//! decides between the hypotheses `min_a mu_a < gamma` and `min_a mu_a > gamma`
//! by adaptively sampling arms. It provides:
//!
//! - mean-parameterized divergences, divergence inversion and conjugate
//!   posteriors for Gaussian (unit variance), Bernoulli and Poisson arms
//!   ([`expfam`]),
//! - sample-complexity lower bounds, characteristic times and oracle
//!   allocations ([`oracle`]),
//! - time-uniform deviation thresholds, subset priors and aggregate
//!   confidence bounds on the minimum ([`deviation`]),
//! - sampling rules (LCB, Thompson, Murphy), stopping rules (Box, Aggregate,
//!   GLRT) and the single-episode driver ([`rules`]),
//! - a reproducible Monte Carlo experiment harness with CSV/JSON output
//!   ([`harness`]).

pub mod deviation;
pub mod expfam;
pub mod harness;
pub mod oracle;
pub mod rules;

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("degenerate instance: minimum mean equals the threshold")]
    DegenerateInstance,
    #[error("wrong hypothesis side: {0}")]
    Side(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
