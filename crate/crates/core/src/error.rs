use alloc::boxed::Box;
use alloc::string::String;

/// Errors raised by the solvers and the structural constructions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coincident points {0} and {1}")]
    CoincidentPoints(usize, usize),

    #[error("infeasible assignment: client {client} cannot reach any open facility")]
    InfeasibleAssignment { client: usize },

    #[error("instance too large for oracle: {facilities} non-free facilities (cap {cap})")]
    OracleTooLarge { facilities: usize, cap: usize },

    #[error("aspect partition failed: group ratio {ratio} exceeds bound {bound}")]
    AspectPartitionFailed { ratio: f64, bound: f64 },

    #[error("separator search exhausted on {vertices} vertices with |X| = {core}")]
    SeparatorExhausted { vertices: usize, core: usize },

    #[error("valid-vector count {count} at decomposition node {node} exceeds cap {cap}; use coarser portal granularity")]
    VectorCapExceeded { node: usize, count: usize, cap: usize },

    #[error("instance infeasible under portal discretization")]
    DiscretizationInfeasible,

    #[error("net enumeration infeasible: {count} candidate nets exceed cap {cap}")]
    NetEnumerationInfeasible { count: f64, cap: usize },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
