//! Crate-wide error type.

use crate::sysmodel::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error in {context}: {message}")]
    Domain {
        context: &'static str,
        message: String,
    },

    /// An iterative routine exhausted its iteration budget.
    #[error("{context} did not converge within {iterations} iterations")]
    NonConvergence {
        context: &'static str,
        iterations: usize,
    },

    /// The energy-recycling fixed point has no finite solution
    /// (loop gain at or above unity).
    #[error("energy loop diverges: tau*c*z = {gain} >= 1")]
    EnergyLoopDivergence { gain: f64 },

    /// Two evaluation routes for the same quantity disagreed beyond
    /// tolerance, which signals an implementation fault rather than a
    /// property of the inputs.
    #[error("evaluator disagreement in {context}: {a} vs {b} (tolerance {tol})")]
    Disagreement {
        context: &'static str,
        a: f64,
        b: f64,
        tol: f64,
    },

    /// A requested operating point cannot be realized (e.g. the circuit
    /// consumes the whole power budget).
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl Error {
    pub fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            context,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
