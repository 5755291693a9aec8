use thiserror::Error;

/// Errors from graph-level operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("exception set is not a clique")]
    XNotClique,
    #[error("graph is not chordal")]
    NotChordal,
    #[error("overlap of the two graphs is not a clique")]
    OverlapNotClique,
    #[error("permutation does not map the vertex set to itself")]
    NotInvariant,
    #[error("sets have different sizes ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("vertex {0} is not in the set")]
    NotInSet(u32),
    #[error("invalid graph6 input: {0}")]
    BadGraph6(String),
    #[error("graph6 supports at most 62 vertices here, got {0}")]
    Graph6TooLarge(usize),
    #[error("invalid edge list input: {0}")]
    BadEdgeList(String),
}

/// Errors from permutation construction and parsing.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("image is not a bijection on [n]")]
    NotBijection,
    #[error("invalid permutation syntax: {0}")]
    BadSyntax(String),
    #[error("label {0} out of range 1..={1}")]
    OutOfRange(u32, u32),
}

/// Errors from exact-arithmetic operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MathError {
    #[error("mu = 1 is not a valid number of moved points")]
    MuOne,
    #[error("uniform_below requires N >= 1")]
    ZeroRange,
    #[error("weighted_choice requires at least one positive weight")]
    AllZeroWeights,
    #[error("pow2_ceil requires a nonnegative exponent")]
    NegativeExponent,
}

/// Errors from the counter-function engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DpError {
    #[error("counter key outside its domain: {0}")]
    DomainViolation(String),
}

/// Errors from samplers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("cannot sample from a key with count zero")]
    ZeroCount,
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("bound violated at mu = {mu}: |R_mu| * Fix exceeds B_mu")]
    BoundViolation { mu: usize },
    #[error("mode requires n <= {limit}, got {n}")]
    TooLarge { n: usize, limit: usize },
}

/// Errors from the brute-force oracle.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle limited to {limit} vertices, got {n}")]
    TooLarge { n: usize, limit: usize },
}

/// Errors from the memo persistence format.
#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache header does not match this session (expected {expected}, found {found})")]
    Mismatch { expected: String, found: String },
    #[error("malformed cache file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
