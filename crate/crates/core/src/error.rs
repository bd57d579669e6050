//! Error type shared across the library.
//!
//! Domain violations are rejected at construction time (probabilities outside
//! their open or half-open intervals), so the numeric layers can assume valid
//! inputs. The remaining variants cover the few ways a numeric routine can
//! legitimately refuse to answer: a series whose geometric ratio reaches 1, a
//! truncated chain whose tail mass is still visible, a chain without a single
//! recurrent class, and an iterative solve that ran out of iterations.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its admissible interval.
    #[error("parameter {name} = {value} outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// An operation was asked for a policy it has no closed form for.
    #[error("{op} has no closed form for the {policy} policy")]
    Unsupported {
        op: &'static str,
        policy: &'static str,
    },

    /// A geometric series fails its convergence condition (ratio ≥ 1).
    #[error("series diverges: geometric ratio {ratio} >= 1")]
    DivergentSeries { ratio: f64 },

    /// The truncated chain still carries visible tail mass at level N.
    #[error("truncation level {n} too small: estimated tail mass {tail:.3e} > {budget:.1e}")]
    TruncationTooSmall { n: usize, tail: f64, budget: f64 },

    /// The chain does not reach all of its states from the initial state.
    #[error("chain is not irreducible: {reason}")]
    NotIrreducible { reason: String },

    /// An iterative stationary solve failed to reach the requested residual.
    #[error("stationary solve did not reach residual {tol:.1e} within {iterations} iterations")]
    NoConvergence { tol: f64, iterations: usize },

    /// A run configuration is structurally invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An I/O failure while reading or writing config/output files.
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}
