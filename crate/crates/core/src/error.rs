use thiserror::Error;

use crate::tree::Vertex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("tree must have at least one vertex")]
    EmptyTree,
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("self loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(Vertex, Vertex),
    #[error("edge ({0}, {1}) closes a cycle")]
    Cycle(Vertex, Vertex),
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("unknown vertex {0}")]
    UnknownVertex(Vertex),
    #[error("vertex map has {got} entries, source tree has {expected} vertices")]
    MapNotTotal { expected: usize, got: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("branch point distribution has no closed form with arc masses present; use the empirical estimator")]
    ArcMassPresent,
    #[error("too many atoms for enumeration ({got} > {limit})")]
    TooManyAtoms { got: usize, limit: usize },
    #[error("tree is not in the binary leaf-atom class: {0}")]
    NotBinaryLeafAtom(String),

    #[error("sample point {0} is a branch point")]
    SampleAtBranchPoint(Vertex),
    #[error("invalid sample point: {0}")]
    InvalidSamplePoint(String),
    #[error("tree is not binary at vertex {0}")]
    NotBinary(Vertex),
    #[error("exact enumeration infeasible: {0}")]
    Infeasible(String),
    #[error("distributions are not comparable: {0}")]
    Mismatch(String),

    #[error("invalid triangulation: {0}")]
    InvalidTriangulation(String),
    #[error("unsupported triangulation: {0}")]
    UnsupportedTriangulation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}
