use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The prime table does not reach the square root of the largest number
    /// under test. Returned instead of risking a silent wrong answer.
    #[error("prime table covers primes <= {limit} but the query needs primes <= {needed}")]
    PrimeTableTooSmall { needed: u64, limit: u64 },

    #[error("prime table holds {available} primes but the computation needs {needed}")]
    TooFewPrimes { needed: usize, available: usize },

    #[error("window [{lo}, {hi}) of {len} numbers exceeds the mask budget of {budget}")]
    WindowTooLarge { lo: u64, hi: u64, len: u64, budget: u64 },

    #[error("empty or inverted range [{lo}, {hi})")]
    EmptyRange { lo: u64, hi: u64 },

    #[error("{0} is outside the search domain (positive integers)")]
    OutOfDomain(u64),

    #[error("minimum gap length must be at least 1")]
    ZeroMinLength,

    #[error("prime table limit {limit} does not fit the sieve's 32-bit prime storage")]
    LimitTooLarge { limit: u64 },

    #[error("duplicate prime {0} in congruence set")]
    DuplicatePrime(u64),

    #[error("congruence set is empty")]
    EmptyAssignment,

    #[error("{0} free offsets requested, at most {1} supported")]
    TooManyFreeOffsets(usize, usize),

    #[error("run statistics are empty")]
    EmptyStats,

    #[error("variant {0} is not an incremental sieve")]
    NotIncremental(String),
}
