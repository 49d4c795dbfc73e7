use thiserror::Error;

/// Errors raised by the numerical kernels, bound evaluators and simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        /// Tail of the iterate trajectory, most recent last.
        trajectory: Vec<(f64, f64)>,
    },

    #[error("{what} diverged: {detail}")]
    Divergence { what: &'static str, detail: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("too large for exhaustive nearest-subspace search: {subsets} subsets exceed the limit of {limit}")]
    TooLarge { subsets: u128, limit: u128 },

    #[error("unachievable: {0}")]
    Unachievable(String),

    #[error("trial {index} failed: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure(ok: bool, name: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain { name, value, expected })
    }
}
