use thiserror::Error;

/// First violated invariant of a [`PhasePartition`](crate::PhasePartition).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("partition needs at least two breakpoints, got {0}")]
    TooFewBreakpoints(usize),
    #[error("{breakpoints} breakpoints require {expected} coefficients, got {coefficients}")]
    Arity {
        breakpoints: usize,
        expected: usize,
        coefficients: usize,
    },
    #[error("non-finite breakpoint at index {0}")]
    NonFiniteBreakpoint(usize),
    #[error("non-finite coefficient at k={0}")]
    NonFiniteCoefficient(usize),
    #[error("breakpoints not increasing at index {0}")]
    NotIncreasing(usize),
    #[error("negative coefficient at k={0}")]
    NegativeCoefficient(usize),
    #[error("adjacent equal at k={0}")]
    AdjacentEqual(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    Partition(#[from] ValidationError),
    #[error("u_minus equals u_plus ({0}); the solution is the constant state")]
    EqualStates(f64),
    #[error("partition spans [{lower}, {upper}] but the states span [{min}, {max}]")]
    StatesMismatch { lower: f64, upper: f64, min: f64, max: f64 },
    #[error("expected {expected} free variables, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("free boundaries are not strictly increasing at slot {0}")]
    Infeasible(usize),
    #[error("log_F_diff requires x > y, got x={x}, y={y}")]
    Domain { x: f64, y: f64 },
    #[error("probability {0} outside (0, 1)")]
    Probability(f64),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("{0}")]
    Unsupported(String),
    #[error("inverse profile is not strictly increasing at node {0}")]
    NonIncreasingProfile(usize),
    #[error("invalid diffusion table: {0}")]
    DiffusionTable(String),
    #[error("invalid finite-difference setup: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
