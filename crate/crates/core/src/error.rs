use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("points {first} and {second} coincide (distance below 1e-12)")]
    DuplicatePoint { first: usize, second: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("constellation has no bit labels")]
    MissingLabels,

    #[error("index {index} out of range for {len} points")]
    InvalidIndex { index: usize, len: usize },

    #[error("pair ({0}, {0}) is not a valid error event; indices must differ")]
    SamePair(usize),

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("geometry too large: {count} vertex candidates exceed the 10^7 enumeration limit")]
    TooLarge { count: u128 },

    #[error("unsupported constellation or oracle: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("refused: {value} is outside the certified convex region ({threshold} = {bound})")]
    Refused {
        threshold: String,
        bound: f64,
        value: f64,
    },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { what, value })
    }
}
