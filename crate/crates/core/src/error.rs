use thiserror::Error;

/// Failure modes across the library. Each variant maps onto one of the CLI
/// exit-code classes through [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distance matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("distance matrix is asymmetric at ({0}, {1})")]
    Asymmetry(usize, usize),
    #[error("nonzero diagonal entry at point {0}")]
    NonzeroDiagonal(usize),
    #[error("negative distance at ({0}, {1})")]
    NegativeDistance(usize, usize),
    #[error("triangle inequality violated: d({0},{2}) > d({0},{1}) + d({1},{2})")]
    TriangleViolation(usize, usize, usize),
    #[error("zero distance between distinct points {0} and {1}")]
    ZeroOffDiagonal(usize, usize),
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("elementary molecule needs two distinct points")]
    SamePoint,
    #[error("unknown point or vertex `{0}`")]
    UnknownPoint(String),
    #[error("molecule coefficients do not sum to zero")]
    NotZeroSum,
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("graph is not a tree")]
    NotATree,
    #[error("edge sequence is not a cycle: {0}")]
    NotACycle(String),
    #[error("Gram matrix is singular; basis is linearly dependent")]
    SingularGram,
    #[error("group element does not map the range onto itself")]
    NotInvariantSubspace,
    #[error("generated group exceeds {0} elements")]
    GroupClosureOverflow(usize),
    #[error("bottom-top geodesic has odd length {0}")]
    OddGeodesic(usize),
    #[error("cycle space of the base graph is trivial")]
    TrivialCycleSpace,
    #[error("edge vector does not belong to the expected graph: {0}")]
    GraphMismatch(String),
    #[error("base graph has no vertical automorphism")]
    NoVerticalAutomorphism,
    #[error("projection is not invariant under generator {0}")]
    NotInvariant(String),
    #[error("resolution {resolution} too coarse for Haar index {index}")]
    ResolutionTooCoarse { index: usize, resolution: usize },
    #[error("partner of selected point {0} is not a nearest point of the complement")]
    MinimalityViolated(usize),
    #[error("selected set has empty complement")]
    EmptyComplement,
    #[error("p = {p} exceeds diam + 1 = {limit}")]
    PTooLarge { p: usize, limit: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Exit codes: 2 validation, 3 solver, 4 resource cap. Usage errors (1) are
    /// raised by the argument parser before any library call.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SolverFailure(_) | Error::SingularGram => 3,
            Error::ResourceLimit(_) | Error::GroupClosureOverflow(_) => 4,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Invalid(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
