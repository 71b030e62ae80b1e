use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid calendar date {year:04}-{month:02}-{day:02}")]
    InvalidDate { year: i32, month: u32, day: u32 },

    #[error("time point {0} outside supported range [1800, 2200]")]
    TimeOutOfRange(f64),

    #[error("format error: {0}")]
    Format(String),

    #[error("format error on line {line}: {msg}")]
    FormatAt { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("state error: {0}")]
    State(String),

    #[error("model undefined at t = {t} (critical time tc = {tc})")]
    Domain { t: f64, tc: f64 },

    #[error("degenerate parameters: {0}")]
    DegenerateParams(String),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("window [{start}, {end}] holds {found} points, fewer than the required {required}")]
    EmptyWindow {
        start: f64,
        end: f64,
        found: usize,
        required: usize,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("refinement failed: {0}")]
    RefinementFailed(String),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("scan failed: no window fit succeeded\n{0}")]
    ScanFailed(String),

    #[error("indeterminate regime: {0}")]
    IndeterminateRegime(String),

    #[error("forecast refused: {0}")]
    NotConverged(String),

    #[error("generation error: {0}")]
    Generation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
