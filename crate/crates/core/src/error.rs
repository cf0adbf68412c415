use thiserror::Error;

/// Errors produced by the m-Hessian toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside the supported range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The input lies outside the set on which the quantity is defined
    /// (typically outside the cone `K_m`).
    #[error("outside domain of definition: {0}")]
    Domain(String),

    /// The boundary fails the (m-1)-convexity gate; no admissible function
    /// with constant boundary data exists.
    #[error("boundary is not ({order})-convex: min k_{order} = {margin:e}; admissible set with constant boundary data is empty")]
    ConvexityGate { order: usize, margin: f64 },

    /// Newton iteration did not reach the requested tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A Newton iterate left the admissible cone and could not be recovered
    /// by step shrinking.
    #[error("iterate left the cone K_{order} (margin {margin:e}); refine the grid or increase damping")]
    ConeExit { order: usize, margin: f64 },

    /// A grid or report file does not have the expected shape.
    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
