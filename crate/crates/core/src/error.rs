use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("step size underflow at tau = {tau}: step {step:e} fell below {min_step:e}")]
    StepUnderflow { tau: f64, step: f64, min_step: f64 },

    #[error(
        "integration window half-width {required:e} exceeds the limit {limit:e}; \
         the rotating-frame field barely sweeps through resonance for this pulse"
    )]
    WindowTooLarge { required: f64, limit: f64 },

    #[error("only the avoided crossing at tau = 0 exists for this pulse")]
    SingleCrossing,

    #[error("no interior {0} detected in the probe grid")]
    NoInteriorExtremum(&'static str),

    #[error("twist order n = {0} is not supported for this conversion (expected 3 or 4)")]
    UnsupportedOrder(u32),

    #[error("sweep window too narrow: f = omega1/|A| = {0} exceeds 0.2")]
    SweepWindowTooNarrow(f64),

    #[error("level ordering violated: {0}")]
    OrderingViolation(String),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. }
                | Error::WindowTooLarge { .. }
                | Error::NoInteriorExtremum(_)
                | Error::SingleCrossing
        )
    }
}
