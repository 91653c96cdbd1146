use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("simplex index {index} out of range (complex has {len} simplices)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("non-monotone filtration: face {face} has value {face_value} above coface {coface} with value {coface_value}")]
    NonMonotone {
        face: usize,
        coface: usize,
        face_value: String,
        coface_value: String,
    },

    #[error("indexing is not compatible with the complex: {0}")]
    IncompatibleIndexing(String),

    #[error("transposition blocked: simplex {face} is a face of simplex {coface}")]
    FaceOrderViolation { face: usize, coface: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("point ({x}, {y}) lies outside the mesh")]
    OutsideMesh { x: String, y: String },

    #[error("element is not in the stalk of cell {cell}")]
    NotInStalk { cell: usize },

    #[error("cells {0} and {1} are not joined by a sheaf edge")]
    NotAdjacent(usize, usize),

    #[error("continuity violation on edge {face}->{coface} at ({x}, {y}): {face_values} vs {coface_values}")]
    ContinuityViolation {
        face: usize,
        coface: usize,
        x: String,
        y: String,
        face_values: String,
        coface_values: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An internal invariant failed; always a bug rather than bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for errors caused by bad input rather than internal bugs.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Invariant(_) | Error::ContinuityViolation { .. })
    }
}
