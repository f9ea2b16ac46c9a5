use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures reported by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter tuple violates one of the admissibility inequalities.
    InvalidParams(&'static str),
    /// An argument is outside the domain of an operation.
    Domain(&'static str),
    /// The grid is too coarse for the requested computation.
    GridTooCoarse { first_node: f64, required: f64 },
    /// A root bracket does not contain a sign change.
    NoSignChange { lo: f64, hi: f64 },
    /// An iterative method stopped without meeting its tolerance.
    NonConvergence { what: &'static str, residual: f64 },
    /// The ODE integrator could not keep the step size above its floor.
    StepUnderflow { r: f64, u: f64, w: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(which) => write!(f, "invalid parameters: {which}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::GridTooCoarse {
                first_node,
                required,
            } => write!(
                f,
                "grid too coarse: first node {first_node:e} exceeds required {required:e}"
            ),
            Error::NoSignChange { lo, hi } => {
                write!(f, "no sign change in bracket [{lo}, {hi}]")
            }
            Error::NonConvergence { what, residual } => {
                write!(f, "{what} did not converge (residual {residual:e})")
            }
            Error::StepUnderflow { r, u, w } => {
                write!(f, "step size underflow at r={r:e} (u={u:e}, w={w:e})")
            }
        }
    }
}

impl core::error::Error for Error {}
