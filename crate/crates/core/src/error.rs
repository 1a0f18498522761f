use thiserror::Error;

/// Every failure the library can report.
///
/// Variants map one-to-one onto the domain errors of the individual
/// operations; the CLI turns all of them into exit status 1.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("prime mismatch: {left} vs {right}")]
    PrimeMismatch { left: u64, right: u64 },
    #[error("digits agree through {digits} places without deciding the order")]
    PrecisionExhausted { digits: u32 },
    #[error("argument outside the convergence domain: {0}")]
    OutOfConvergenceDomain(String),
    #[error("the Legendre symbol needs an odd prime")]
    EvenPrime,
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("place mismatch: {0}")]
    PlaceMismatch(String),
    #[error("integrand is not constant on cosets of p^{level}: probe values differ by {difference:e}")]
    RefinementTooCoarse { level: i64, difference: f64 },
    #[error("quadratic coefficient must be nonzero")]
    ZeroQuadraticCoefficient,
    #[error("not an idele: {0}")]
    NotAnIdele(String),
    #[error("unsupported real factor: {0}")]
    UnsupportedRealFactor(String),
    #[error("half-integer phase at p = 2: chi_2({0}/2) is not fixed by the phase lattice")]
    HalfIntegerObstruction(String),
    #[error("no constant phase relates the two operator orderings")]
    NotProportional,
    #[error("outside the model domain: {0}")]
    OutOfDomain(String),
    #[error("mixed second derivative of the classical action vanishes or is undefined")]
    DegenerateTime,
    #[error("regularized integral not stabilized: values moved by {max_change:e}")]
    NotStabilized { max_change: f64 },
    #[error("the zero function is not a valid input")]
    ZeroFunction,
    #[error("unknown model: {0}")]
    UnknownModel(String),
    #[error("argument sits on a pole: {0}")]
    PoleArgument(String),
    #[error("outside the convergence region: {0}")]
    OutOfConvergenceRegion(String),
    #[error("dimension {0} too small (need d >= 2 for nonzero theta)")]
    DimensionTooSmall(usize),
    #[error("window too small: no cell agrees with the plane-wave computation")]
    WindowTooSmall,
    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),
    #[error("lattice modulus {0} exceeds the 62-bit working range")]
    LatticeOverflow(String),
    #[error("cannot factor {0}: exceeds 64 bits")]
    FactorizationTooLarge(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
