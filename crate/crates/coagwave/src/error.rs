use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum CoagError {
    /// Configuration file or parameter override rejected.
    #[error("config: {0}")]
    Config(String),

    /// State vector length does not match the model kind.
    #[error("{kind} expects {expected} components, state has {got}")]
    DimensionMismatch {
        kind: String,
        expected: usize,
        got: usize,
    },

    /// Reaction terms are not defined for negative concentrations.
    #[error("negative concentration {value:e} in component {component}")]
    NegativeConcentration { component: String, value: f64 },

    /// Parameter outside its admissible range.
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: String,
    },

    /// The thrombin profile does not cross the threshold exactly once.
    #[error("no front: threshold crossed {crossings} times, expected exactly 1")]
    NoFront { crossings: usize },

    /// Front trace exists but no reliable speed can be fitted.
    #[error("speed measurement not converged: {0}")]
    NotConverged(String),

    /// `b w^(n-1) (1-w) = sigma` has no positive solution.
    #[error("no upper state: sigma = {sigma:e} exceeds the maximum {max:e} of b*w^(n-1)*(1-w)")]
    NoUpperState { sigma: f64, max: f64 },

    /// Piecewise-linear kink location failed; carries the intermediates.
    #[error(
        "invalid kink: {reason} (w* = {w_star:.6}, r = {r:.6e}, discriminant = {discriminant:.6e})"
    )]
    InvalidKink {
        reason: String,
        w_star: f64,
        r: f64,
        discriminant: f64,
    },

    /// Test profile has no usable monotone transition region.
    #[error("unusable test profile: {0}")]
    UnusableProfile(String),

    /// Time stepping diverged even after automatic dt reduction.
    #[error("simulation diverged at t = {t:.4} min (dt = {dt:e}): {what}")]
    Diverged { t: f64, dt: f64, what: String },

    /// Requested operation needs a bistable parameter set.
    #[error("not bistable: {0}")]
    NotBistable(String),

    /// Malformed CSV or config input.
    #[error("parse: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoagError>;
