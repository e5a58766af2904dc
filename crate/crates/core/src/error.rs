use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("digraph must have at least one vertex")]
    NoVertices,

    #[error("duplicate arc ({0}, {1})")]
    DuplicateArc(usize, usize),

    #[error("arc endpoint {vertex} out of range for a digraph on {n} vertices")]
    EndpointOutOfRange { vertex: usize, n: usize },

    #[error("star graph needs an even positive arc count, got {0}")]
    OddStar(usize),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid Cayley table: {0}")]
    InvalidCayleyTable(String),

    #[error("invalid edge colouring: {0}")]
    InvalidColouring(String),

    #[error("digraph is not quantisable: vertex {vertex} has in-degree {d_in} and out-degree {d_out}")]
    NotQuantisable { vertex: usize, d_in: usize, d_out: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("arc length must be positive and finite, got {0}")]
    NonPositiveLength(f64),

    #[error("matrix is not unitary (max |U*U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not stochastic: {0}")]
    NotStochastic(String),

    #[error("eigendecomposition failed")]
    Eigensolver,

    #[error("eigenvalue modulus {0} is off the unit circle")]
    OffUnitCircle(f64),

    #[error("orbit length {n} exceeds the enumeration cap {cap}")]
    OrbitLengthCap { n: usize, cap: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("distribution is not normalised (total mass {0})")]
    Unnormalised(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
