use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("vertex set is empty")]
    EmptyVertexSet,
    #[error("vertex {0} out of range for graph of order {1}")]
    VertexOutOfRange(usize, usize),
    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),
    #[error("pairing model failed to produce a simple graph after {0} attempts")]
    PairingExhausted(u32),

    #[error("graph6: {0}")]
    Graph6(#[from] crate::graph6::Graph6Error),
    #[error("edge list parse error: {0}")]
    EdgeList(String),

    #[error("order {n} exceeds feasibility cap {cap}; raise the budget to override")]
    CapExceeded { n: usize, cap: usize },
    #[error("counting budget exceeded after {subsets_examined} subsets; partial results are invalid")]
    BudgetExceeded { subsets_examined: u64 },
    #[error("exhaustive search over n <= {requested} rejected: {cost} labeled graphs exceed the 2^21-per-order cap")]
    SearchTooLarge { requested: usize, cost: String },

    #[error("alpha must satisfy 0 < alpha < 1, got {0}")]
    BadAlpha(String),
    #[error("beta must satisfy 0 < beta < 1, got {0}")]
    BadBeta(String),
    #[error("crux search cap {cap} exceeded; sizes 1..={cap} refuted")]
    CruxCapExceeded { cap: usize },
    #[error("operation requires a regular graph")]
    NotRegular,
    #[error("precondition lambda/d >= eps*alpha: bound is not applicable")]
    NotApplicable,

    #[error("invalid expander parameters: {0}")]
    BadExpanderParams(String),
    #[error("expander extraction budget exhausted; best candidate has average degree {best_avg_degree}")]
    ExtractionFailed { best_avg_degree: String },
    #[error("no ball of size {size_target} within radius {radius_cap} found avoiding the given set")]
    NoBall { size_target: usize, radius_cap: usize },
    #[error("no path of length <= {cap} found; shortest avoiding distance: {achieved}")]
    NoShortPath { cap: usize, achieved: String },

    #[error("pipeline stage `{stage}` failed: {reason}")]
    PipelineStage { stage: &'static str, reason: String },
    #[error("chain must contain at least {min} cycles, got {got}")]
    ChainTooShort { min: usize, got: usize },
    #[error("wheel has {ell} attached cycles, exceeding the enumeration cap {cap}")]
    WheelTooLarge { ell: usize, cap: usize },
    #[error("structural invariant violated: {0}")]
    Invariant(String),

    #[error("graph is not a beta-graph: disjoint sets {a:?} and {b:?} have no edge between them")]
    NotBetaGraph { a: Vec<usize>, b: Vec<usize> },
    #[error("guaranteed mode requires c > 4*beta (|S| = {s}, beta*n = {threshold})")]
    SubsetTooSmall { s: usize, threshold: String },
}
