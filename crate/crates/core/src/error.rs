use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the evaluated function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The parameter regime does not support the requested computation.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("vector field is singular at the origin")]
    SingularOrigin,

    #[error("singular vector field evaluation at t = {t}: {reason}")]
    SingularField { t: f64, reason: String },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),

    #[error("non-finite state encountered at t = {0}")]
    NonFinite(f64),

    /// The requested locus is never reached on the integration span.
    #[error("no crossing: {0}")]
    NoCrossing(String),

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("root finder did not converge after {0} iterations")]
    RootNotConverged(usize),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("orbit classification inconclusive: {0}")]
    Inconclusive(String),

    /// The equation E(m) = d has no admissible root.
    #[error("E(m) = d is not solvable: {0}")]
    Unsolvable(String),

    /// d sits on the minimum of E, where the homoclinic analysis needs a
    /// saddle-node unfolding.
    #[error("degenerate critical case: |d - E(eta)| = {0:e}")]
    DegenerateCritical(f64),

    #[error("target period {target} outside attained range [{lo}, {hi}]")]
    OutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
