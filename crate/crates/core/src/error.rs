use std::path::PathBuf;

use thiserror::Error;

/// Why a single polygon was rejected by the geometry kernel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolygonError {
    #[error("polygon has {0} vertices, at least 3 are required")]
    TooFewVertices(usize),
    #[error("polygon has zero or negative area")]
    ZeroArea,
    #[error("polygon boundary self-intersects")]
    SelfIntersecting,
    #[error("polygon is not star-shaped with respect to any interior point")]
    NotStarShaped,
    #[error("polygon repeats vertex index {0}")]
    DuplicateVertex(usize),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element}: {source}")]
    InvalidElement {
        element: usize,
        #[source]
        source: PolygonError,
    },
    #[error("mesh is not conforming: {0}")]
    NonConforming(String),
    #[error("vertex index {index} out of range (mesh has {count} vertices) in element {element}")]
    VertexOutOfRange { element: usize, index: usize, count: usize },
    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported mesh request: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mesh has no interior degrees of freedom")]
    NoInteriorDofs,
    #[error("singular local projector system on element {0}")]
    SingularProjector(usize),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
    #[error("eigensolver did not converge after {iterations} restarts; residuals {residuals:?}")]
    NotConverged { iterations: usize, residuals: Vec<f64> },
    #[error("near-defective eigenpair: |left^H C right| = {0:e}")]
    DefectivePair(f64),
    #[error("eigenpair is not normalized: right^H C right = {0}")]
    Unnormalized(f64),
    #[error("study step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
