use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("unsupported order l = {l} (maximum is {max})")]
    UnsupportedOrder { l: u32, max: u32 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid channel: {0}")]
    Channel(String),

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("step size underflow at r = {r:e}")]
    Stiffness { r: f64 },

    #[error("step budget of {steps} exhausted at r = {r:e}")]
    StepBudget { steps: usize, r: f64 },

    #[error("pole of the scattering-length function between r = {lo:e} and r = {hi:e}")]
    Pole { lo: f64, hi: f64 },

    #[error("rank-deficient fit: {0}")]
    Rank(String),

    #[error("no usable fit window")]
    NoWindow,

    #[error("ill-conditioned phase match at r1 = {r1}, r2 = {r2}")]
    IllConditioned { r1: f64, r2: f64 },

    #[error("outside the supported regime: {0}")]
    Regime(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
