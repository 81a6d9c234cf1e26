use thiserror::Error;

/// Errors produced by the forward and inverse models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Lamé constant λ is singular at ν = 0.5; use the incompressible path")]
    IncompressibleSingular,

    #[error("Boussinesq field is singular at the load point")]
    SingularPoint,

    #[error("point lies outside the half-space (x3 = {x3})")]
    OutsideHalfSpace { x3: f64 },

    #[error("finite-difference step degenerate: Richardson levels disagree by {rel:.3e}")]
    StepDegenerate { rel: f64 },

    #[error("rational coefficient near a pole in `{which}` (denominator {denominator:.3e})")]
    PoleProximity { which: &'static str, denominator: f64 },

    #[error("no contact solution for w = {w:.6e} m; admissible range is w < {w_max:.6e} m")]
    NoContactRoot { w: f64, w_max: f64 },

    #[error("root bracket does not change sign on [{lo:.6e}, {hi:.6e}]")]
    BadBracket { lo: f64, hi: f64 },

    #[error("non-positive stiffness {value:.6e} N/m at point {index}")]
    NonPositiveStiffness { index: usize, value: f64 },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("non-finite stiffness sample at point {index}")]
    NonFiniteSample { index: usize },

    #[error("infeasible combined inclusion value q = {q:.6e}: no physical modulus ratio outside (-10, 15)")]
    InfeasibleRatio { q: f64 },

    #[error("extraction requires the indentation depth w; map metadata is absent")]
    MissingDepth,

    #[error("the fit has not converged")]
    NotConverged,

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}:{line}: {message}")]
    Malformed { path: String, line: u64, message: String },

    #[error("bad quantity `{text}`: {reason}")]
    Unit { text: String, reason: String },

    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
