use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("negative probability {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("zero probability at index {index} where strict positivity is required")]
    ZeroEntry { index: usize },
    #[error("perturbation entries sum to {sum}, not 0")]
    NotZeroSum { sum: f64 },
    #[error("perturbation not orthogonal to sqrt-base: inner product {inner}")]
    NotOrthogonal { inner: f64 },
    #[error("mixture of perturbations does not vanish: max residual {residual}")]
    MarginalNotPreserved { residual: f64 },
    #[error("epsilon {epsilon} outside valid range (0, {max})")]
    EpsilonOutOfRange { epsilon: f64, max: f64 },
    #[error("channel column {index} sums to {sum}, not 1")]
    NotColumnStochastic { index: usize, sum: f64 },
    #[error("output symbol {index} has zero probability under the given input")]
    DeadOutputSymbol { index: usize },
    #[error("matrix not symmetric: max asymmetry {residual}")]
    NotSymmetric { residual: f64 },
    #[error("not a valid Gram matrix: {context}")]
    InvalidGram { context: String },
    #[error("parameter {name} = {value} outside {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("multiplier {name} = {value} must be nonnegative")]
    NegativeMultiplier { name: &'static str, value: f64 },
    #[error("linear program infeasible: {context}; re-initialize the iterate")]
    LpInfeasible { context: String },
    #[error("alphabet size {size} exceeds supported bound {bound}")]
    AlphabetTooLarge { size: usize, bound: usize },
    #[error("eavesdropper channel better than legitimate; degradedness assumption violated (lambda_lam {lambda_lam} > lambda_v {lambda_v})")]
    DegradednessViolated { lambda_v: f64, lambda_lam: f64 },
    #[error("no feasible samples accepted by the oracle")]
    NoAcceptedSamples,
    #[error("invalid perturbation family: {0}")]
    InvalidFamily(Box<Error>),
}

pub type Result<T> = std::result::Result<T, Error>;
