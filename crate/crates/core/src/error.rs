use thiserror::Error;

/// Errors raised by the auction model and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("risk coefficient must satisfy rho <= 0 (got rho = {0})")]
    RiskAverse(f64),

    #[error("{name} must be finite (got {value})")]
    NonFinite { name: &'static str, value: f64 },

    #[error("player count must satisfy n >= 2 (got n = {0})")]
    TooFewPlayers(usize),

    #[error("object value must satisfy v > 0 (got v = {0})")]
    NonPositiveValue(f64),

    #[error("sale price must satisfy s >= 0 (got s = {0})")]
    NegativeSalePrice(f64),

    #[error("bid fee must satisfy c > 0 (got c = {0})")]
    NonPositiveBidFee(f64),

    #[error("bid fee must satisfy c < v - s (got c = {bid_fee}, v - s = {surplus})")]
    FeeExceedsSurplus { bid_fee: f64, surplus: f64 },

    #[error("active player count must satisfy k >= {min} (got k = {k})")]
    ActiveCount { k: usize, min: usize },

    #[error("target player count must satisfy m >= 1 (got m = {0})")]
    TargetCount(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("utility overflow: -rho * x = {0} exceeds 700")]
    Overflow(f64),

    #[error("win probability u(c)/u(v-s) underflows double precision")]
    Underflow,

    #[error("revenue series needs about {terms_needed:.3e} terms to reach tolerance, budget is {budget}")]
    SeriesBudget { terms_needed: f64, budget: u64 },

    #[error("equilibrium policy covers player counts up to {covered}, game needs {needed}")]
    PolicyCoverage { covered: usize, needed: usize },
}

impl Error {
    /// True for failures of floating point evaluation rather than of the
    /// caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_) | Error::Underflow | Error::SeriesBudget { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
