use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("0/0 is not a slope")]
    ZeroSlope,
    #[error("cannot parse slope from {0:?}")]
    ParseSlope(String),
    #[error("matrix determinant is {0}, expected +1 or -1")]
    NotUnimodular(String),
    #[error("operation needs two distinct slopes, got {0} twice")]
    EqualSlopes(String),
    #[error("invalid triangulation: {0}")]
    InvalidTriangulation(String),
    #[error("vertex {vertex} out of range for a {n}-gon")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("horoballs {0} and {0} coincide; the path between them is degenerate")]
    DegeneratePath(usize),
    #[error("diagonal ({0}, {1}) is not in the triangulation")]
    MissingDiagonal(usize, usize),
    #[error("base assignment is not a positively oriented Farey triangle: {0}")]
    InconsistentAssignment(String),
    #[error("polygon size {n} outside the supported range {min}..={max}")]
    SizeOutOfRange { n: usize, min: usize, max: usize },
    #[error("invalid family parameter: {0}")]
    InvalidFamily(String),
    #[error("height class {0} is empty or has no horoball at that height")]
    EmptyHeightClass(u64),
    #[error("input is not a {k}-system: {a} and {b} intersect {iota} times")]
    NotAKSystem {
        k: u64,
        a: String,
        b: String,
        iota: String,
    },
    #[error("enumeration frontier n = {max_n} reached with kappa_T({max_n}) = {kappa} <= {k}")]
    FrontierExceeded { k: u64, max_n: usize, kappa: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
