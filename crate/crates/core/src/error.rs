use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter recursion overflows at level {level}")]
    Overflow { level: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("viewport {0} holds no complete top-level window")]
    NoCompleteWindow(String),

    #[error("structural audit failed at catalog entry {entry}: {reason}")]
    StructuralAudit { entry: usize, reason: String },

    #[error("entry {0} is clipped")]
    Clipped(usize),

    #[error("bag sizes not monotone at node {node}: m = {m}, m(next) = {m_next}")]
    BagMonotonicity {
        node: usize,
        m: usize,
        m_next: usize,
    },

    #[error("cannot cut a block of length {len} into {m} parts")]
    CutTooFine { len: i64, m: usize },

    #[error("slices of {rect} with m = {m} would have a side shorter than 3")]
    SliceTooThin { rect: String, m: usize },

    #[error("fold precondition failed for slice {slice}: {reason}")]
    Fold { slice: usize, reason: String },

    #[error("no feasible slice count at index j = {j}: {reason}")]
    Infeasible { j: usize, reason: String },

    #[error("plan invariant violated at index j = {j}: {reason}")]
    PlanInvariant { j: usize, reason: String },

    #[error("event is not increasing: {0}")]
    NotIncreasing(String),

    #[error("too many edges for exhaustive enumeration: {0} > 20")]
    TooManyEdges(usize),

    #[error("duality is planar only; graph uses layer 0 and 1")]
    NotPlanar,

    #[error("clusters must be disjoint")]
    SameCluster,

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
