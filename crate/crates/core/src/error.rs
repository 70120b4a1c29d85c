use thiserror::Error;

use crate::scalar::Scalar;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} for this operation")]
    UnsupportedDimension(usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("could not parse rational {0:?}")]
    Parse(String),

    #[error("body is unbounded")]
    Unbounded,

    #[error("measure value is infinite")]
    InfiniteMeasure,

    #[error("perimeter tolerance not reached within {bits} bits of precision")]
    PrecisionBudget { bits: u64 },

    #[error("comparison against {threshold} undecided within precision budget")]
    Undecided { threshold: Scalar },

    #[error("target {target} exceeds the measure of the body ({available})")]
    TargetTooLarge { target: String, available: String },

    #[error("direction is not generic for the lattice points in the body")]
    NonGenericDirection,

    #[error("inscribed polytope needs more than {budget} vertices; best ratio with budget was {achieved}")]
    VertexBudget { budget: usize, achieved: String },

    #[error("class {class} does not contain target {target} in its hull")]
    CaratheodoryPrecondition { class: usize, target: usize },

    #[error("no colorful choice found: {0}")]
    CaratheodoryFailed(String),

    #[error("Tverberg precondition failed: {0}")]
    TverbergPrecondition(String),

    #[error("central region too small: achieved {achieved}, required {required}")]
    CentralRegionTooSmall { achieved: String, required: String },

    #[error("weak net iteration cap {cap} exceeded after covering {covered} subsets")]
    IterationCap { cap: u64, covered: usize },

    #[error("candidate pool exceeds budget: {count} > {budget}")]
    PoolBudget { count: usize, budget: usize },

    #[error("family member {member} contains no candidate; increase s_max or the direction set")]
    Uncoverable { member: usize },

    #[error("LP is infeasible")]
    Infeasible,

    #[error("LP is unbounded")]
    LpUnbounded,

    #[error("LP certificate failed: {0}")]
    Certificate(String),

    #[error("net validation failed: member {member} contains no net element")]
    NetValidation { member: usize },

    #[error("hypothesis violated by subfamily {0:?}")]
    Hypothesis(Vec<usize>),

    #[error("no qualifying tuple")]
    NoQualifyingTuple,

    #[error("family too large: {0}")]
    FamilyTooLarge(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
