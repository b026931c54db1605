use thiserror::Error;

/// Failures reported by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coordinate {x} lies outside the potential domain")]
    DomainViolation { x: f64 },

    #[error("no classical region at E = {energy}")]
    NoClassicalRegion { energy: f64 },

    #[error("multi-well potentials are unsupported ({crossings} sign changes of p^2 at E = {energy})")]
    MultiWell { energy: f64, crossings: usize },

    #[error("expansion point {x} is outside the classically allowed region")]
    OutsideClassicalRegion { x: f64 },

    #[error("expansion point {x} is too close to a turning point (|p| = {momentum:e})")]
    TooCloseToTurningPoint { x: f64, momentum: f64 },

    #[error("boundary value {re} + {im}i must have a positive real part")]
    NonPositiveBoundary { re: f64, im: f64 },

    #[error("resolution overflow: grid needs more than {cap} nodes (reached x = {reached})")]
    ResolutionOverflow { cap: usize, reached: f64 },

    #[error("stiffness failure near x = {x}")]
    StiffnessFailure { x: f64 },

    #[error("QLM divergence: update norm {update_norm:e} after {iterations} iterations")]
    QlmDivergence { iterations: usize, update_norm: f64 },

    #[error("positivity violation: Re M = {value:e} at x = {x}")]
    PositivityViolation { x: f64, value: f64 },

    #[error("root search failed: {0}")]
    RootNotBracketed(String),

    #[error("unconverged oracle extrapolation for level {level}: coarse {coarse}, fine {fine}")]
    OracleUnconverged { level: usize, coarse: f64, fine: f64 },

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("phase solve failed near threshold; closest energy reached {closest}: {reason}")]
    ThresholdFailure { closest: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
