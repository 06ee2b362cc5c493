use thiserror::Error;

/// Errors produced by mesh construction, tracing, differentiation and optimization.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("non-manifold edge ({0}, {1}) is shared by {2} faces")]
    NonManifold(usize, usize, usize),

    #[error("degenerate face {0}")]
    DegenerateFace(usize),

    #[error("invalid surface point: {0}")]
    InvalidPoint(String),

    #[error("numerical stall while tracing in face {face}")]
    NumericalStall { face: usize },

    #[error("trace reached boundary vertex {vertex}")]
    BoundaryHit { vertex: usize },

    #[error("direction is degenerate (norm below 1e-12)")]
    DegenerateDirection,

    #[error("perturbed trace escaped through the mesh boundary")]
    PerturbationEscaped,

    #[error("point is not on the unit sphere")]
    NotOnSphere,

    #[error("vector is not tangent at the base point")]
    NotTangent,

    #[error("integration step too large: relative speed drift {0:e}")]
    StepTooLarge(f64),

    #[error("exceeded {0} iterations")]
    MaxIterations(usize),

    #[error("Voronoi cell of seed {0} is empty")]
    EmptyCell(usize),

    #[error("line search found no acceptable step")]
    LineSearchFailed,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable variant name for machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "Parse",
            Error::NonManifold(..) => "NonManifold",
            Error::DegenerateFace(_) => "DegenerateFace",
            Error::InvalidPoint(_) => "InvalidPoint",
            Error::NumericalStall { .. } => "NumericalStall",
            Error::BoundaryHit { .. } => "BoundaryHit",
            Error::DegenerateDirection => "DegenerateDirection",
            Error::PerturbationEscaped => "PerturbationEscaped",
            Error::NotOnSphere => "NotOnSphere",
            Error::NotTangent => "NotTangent",
            Error::StepTooLarge(_) => "StepTooLarge",
            Error::MaxIterations(_) => "MaxIterations",
            Error::EmptyCell(_) => "EmptyCell",
            Error::LineSearchFailed => "LineSearchFailed",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}
