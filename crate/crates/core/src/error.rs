use thiserror::Error;

/// Failure modes shared by every verifier in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("X = {x} exceeds the exact-solve cap {cap}")]
    CapExceeded { x: u64, cap: u64 },
    #[error("progression has length 0")]
    EmptyProgression,
    #[error("modulus {0} is not in the modulus set")]
    UnknownModulus(u64),
    #[error("moduli product {product} is smaller than X = {x}, projection is not injective")]
    NotInjective { product: u64, x: u64 },
    #[error("progression step {step} shares a factor with modulus {modulus}")]
    StepNotCoprime { step: u64, modulus: u64 },
    #[error("hypotheses violated: {}", .0.join("; "))]
    HypothesisViolated(Vec<String>),
    #[error("rho = {rho} exceeds the admissible bound {bound}")]
    RhoTooLarge { rho: f64, bound: f64 },
    #[error("function is not (r, gamma)-global: derivative norm {norm} exceeds {bound}")]
    NotGlobal { norm: f64, bound: f64 },
    #[error("precondition failed: measured {measured} below required {required}")]
    PreconditionFailed { measured: f64, required: f64 },
    #[error("no qualifying cell found in the increment search")]
    SearchExhausted,
    #[error("set is not square-difference-free: {a1} - {a2} = {n}^2")]
    NotSquareDifferenceFree { a1: u64, a2: u64, n: u64 },
    #[error("no verified increment witness found over {frequencies} frequencies")]
    NoWitnessFound { frequencies: usize },
    #[error("element {0} lies outside [1, X]")]
    OutOfUniverse(u64),
    #[error("{0} is not an odd prime")]
    NotPrime(u64),
    #[error("prime {0} is not 1 mod 4")]
    BadPrimeClass(u64),
    #[error("epsilon {epsilon} is below 4 p^(-1/4) = {required}")]
    EpsilonTooSmall { epsilon: f64, required: f64 },
    #[error("parameters infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    /// True for errors signalling a violated precondition or hypothesis rather than bad input.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::HypothesisViolated(_)
                | Error::RhoTooLarge { .. }
                | Error::NotGlobal { .. }
                | Error::PreconditionFailed { .. }
                | Error::NotSquareDifferenceFree { .. }
                | Error::EpsilonTooSmall { .. }
                | Error::Infeasible(_)
                | Error::NotInjective { .. }
                | Error::StepNotCoprime { .. }
                | Error::CapExceeded { .. }
                | Error::BadPrimeClass(_)
                | Error::NotPrime(_)
                | Error::OutOfUniverse(_)
        )
    }

    /// True for errors that report a falsified claim.
    pub fn is_verified_failure(&self) -> bool {
        matches!(self, Error::SearchExhausted | Error::NoWitnessFound { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
