use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must lie in {range}, got {value}")]
    OutOfRange {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("invalid thresholds: {0}")]
    Thresholds(String),

    #[error("invalid binomial count: {exceedances} exceedances in {draws} draws")]
    Count { draws: u64, exceedances: u64 },

    #[error("rank {rank} out of range 1..={n}")]
    Rank { rank: usize, n: usize },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("sample collection is empty")]
    EmptySamples,

    #[error("tail fit needs at least {needed} positive points in range, found {found}")]
    InsufficientTail { needed: usize, found: usize },

    #[error("partition thresholds do not match the procedure thresholds")]
    PartitionMismatch,

    #[error("expected {expected} entries (one per hypothesis), got {got}")]
    Length { expected: usize, got: usize },

    #[error("brute-force enumeration limited to m <= {max}, got {m}")]
    TooManyHypotheses { m: usize, max: usize },

    #[error("invalid spending table: {0}")]
    Spending(String),

    #[error("worker pool: {0}")]
    Pool(String),
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, range: &'static str, value: impl Into<f64>) -> Self {
        Error::OutOfRange {
            name,
            range,
            value: value.into(),
        }
    }
}

/// Rejects anything outside the open unit interval.
pub(crate) fn check_open_unit<T: crate::Real>(name: &'static str, x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(Error::out_of_range(name, "(0, 1)", x.to_f64().unwrap_or(f64::NAN)))
    }
}

pub(crate) fn check_closed_unit<T: crate::Real>(name: &'static str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::out_of_range(name, "[0, 1]", x.to_f64().unwrap_or(f64::NAN)))
    }
}
