use thiserror::Error;

/// Errors shared across the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("base must be at least 2, got {0}")]
    BaseTooSmall(u32),

    #[error("excluded digit set must not be empty")]
    EmptyExcludedSet,

    #[error("digit {digit} is out of range for base {base}")]
    DigitOutOfRange { digit: u32, base: u32 },

    #[error("closed forms exist only for E = {{0}} or E = {{b-1}}, got E = {{{0}}}")]
    UnsupportedExcludedSet(String),

    #[error("argument must be positive")]
    NonPositiveArgument,

    #[error("zeta is only evaluated at integers n >= 2, got {0}")]
    ZetaArgumentTooSmall(u32),

    #[error("enumerating {strings} admissible strings exceeds the atom budget of {budget}")]
    AtomBudgetExceeded { strings: u128, budget: u64 },

    #[error(
        "series needs roughly {estimated_terms} terms (dominant ratio {ratio:.5}); \
         pass --allow-slow (allow_slow) to proceed"
    )]
    SlowConvergence { estimated_terms: u64, ratio: f64 },

    #[error("series did not reach the tolerance within {cap} terms; dominant ratio {ratio:.5}")]
    TermCapExceeded { cap: u64, ratio: f64 },

    #[error("division by a ball that contains zero")]
    BallDivisionByZero,

    #[error("decay-order fit needs at least 3 usable samples, got {0}")]
    TooFewSamples(usize),

    #[error("defects are indistinguishable from rounding error; order fit is inconclusive")]
    InconclusiveOrder,

    #[error("tolerance must be positive and finite")]
    BadTolerance,
}
