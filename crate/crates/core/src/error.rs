use thiserror::Error;

/// Errors raised by the trimmed-IGA pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("point {point:?} lies outside element {element:?}")]
    PointOutsideElement { element: [usize; 3], point: [f64; 3] },

    #[error("non-positive geometry Jacobian {det:e} at parametric point {point:?}")]
    GeometryValidity { det: f64, point: [f64; 3] },

    #[error("element {element:?} is tangentially cut: every sample lies within the geometric tolerance of the trimming boundary")]
    TangentialCut { element: [usize; 3] },

    #[error("element {element:?} is not cut by the trimming boundary")]
    NotCut { element: [usize; 3] },

    #[error("degenerate cut topology in element {element:?}: {reason}")]
    DegenerateTopology { element: [usize; 3], reason: String },

    #[error("re-parameterization of element {element:?} failed: {reason}")]
    ReparamFailure { element: [usize; 3], reason: String },

    #[error("degenerate boundary face: zero surface measure")]
    DegenerateFace,

    #[error("quadrature order {0} outside the supported range 1..=30")]
    QuadratureOrder(usize),

    #[error("cut element {0:?} has no re-parameterization")]
    MissingReparam([usize; 3]),

    #[error("invalid problem definition: {0}")]
    InvalidProblem(String),

    #[error("Dirichlet face {face} is trimmed away")]
    TrimmedDirichletFace { face: usize },

    #[error("mean-value constraint cannot be combined with Dirichlet data")]
    ConstraintWithDirichlet,

    #[error("non-positive diagonal entry {value:e} for unknown {index} (active function {function}, component {component})")]
    NonPositiveDiagonal {
        index: usize,
        function: usize,
        component: usize,
        value: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
