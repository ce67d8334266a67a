use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid weight vector: {0}")]
    InvalidWeight(String),

    #[error("exponent p = {p} is critical (p = D = {d}); use the Trudinger functional instead")]
    CriticalExponent { p: f64, d: f64 },

    #[error("exponent p = {p} is supercritical (p > D = {d}); use the Morrey estimates instead")]
    SupercriticalExponent { p: f64, d: f64 },

    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("non-finite integrand value {value} at node {node:?}")]
    NonFiniteIntegrand { node: Vec<f64>, value: f64 },

    #[error("divergent tail: integrand must decay faster than r^-{required}, declared r^-{declared}")]
    DivergentTail { required: f64, declared: f64 },

    #[error("degenerate parametrization: metric factor {0:e} at parameter point")]
    DegenerateParametrization(f64),

    #[error("Monte Carlo acceptance rate {rate:e} is below 1e-3; use a tighter bounding box")]
    LowAcceptance { rate: f64 },

    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
