use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("inconsistent predictions on identical inputs: rows {first} and {second}")]
    InconsistentPredictions { first: usize, second: usize },

    #[error("degenerate group: calibration error of an empty group is undefined")]
    DegenerateGroup,

    #[error("vacuous grouping: every member is empty")]
    VacuousGrouping,

    #[error("index {index} out of range for dataset of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("duplicate index {0} in group")]
    DuplicateIndex(usize),

    #[error("weights are not normalized: sum = {0}")]
    NotNormalized(f64),

    #[error("invalid weight at position {position}: {value}")]
    InvalidWeight { position: usize, value: f64 },

    #[error("weights differ on identical inputs (indices {first} and {second})")]
    WeightNotFunctionOfInput { first: usize, second: usize },

    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel weights vanish for anchor {anchor}; bandwidth too small")]
    VanishingKernel { anchor: usize },

    #[error("infeasible epsilon {epsilon}: must lie in the open interval (0, {upper})")]
    InfeasibleEpsilon { epsilon: f64, upper: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
