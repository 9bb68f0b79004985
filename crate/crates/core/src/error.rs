use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficient tail is not square summable (decay exponent {0} <= 1/2)")]
    NotSquareSummable(f64),

    #[error("{what} did not converge after {iterations} iterations (last estimate {estimate:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
    },

    #[error("system is exactly singular: lambda equals diagonal entry {index}")]
    ExactlySingular { index: usize },

    #[error("diagonal entries {i} and {j} are separated by {gap:e}, below threshold {threshold:e}")]
    DiagonalSeparation {
        i: usize,
        j: usize,
        gap: f64,
        threshold: f64,
    },

    #[error("recovered coefficients fail the decay check (tail ratio {ratio:e}); grid too coarse")]
    Aliasing { ratio: f64 },

    #[error("aliasing guard: order {order} exceeds M/4 = {limit}")]
    AliasingGuard { order: usize, limit: usize },

    #[error("boundary sample {index} has modulus {modulus} (not unimodular)")]
    NonUnimodular { index: usize, modulus: f64 },

    #[error("evaluation at atom location {0}")]
    AtomEvaluation(num_complex::Complex64),

    #[error("mapped point {0} lies on or outside the unit circle")]
    OutsideDisk(num_complex::Complex64),

    #[error("rank collapse in {0}")]
    RankCollapse(&'static str),

    #[error("ill-conditioned Gram matrix: {0}")]
    IllConditioned(String),

    #[error("partial sums did not stagnate (last increment {increment:e})")]
    NoStagnation { increment: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
