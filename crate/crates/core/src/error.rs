use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("basis matrix is singular")]
    SingularBasis,
    #[error("sublattice coefficient matrix is singular")]
    SingularSublattice,
    #[error("integer overflow in exact lattice arithmetic")]
    IntegerOverflow,
    #[error("sublattice index must be positive, got {0}")]
    NonPositiveIndex(i64),
    #[error("disk {0} has non-positive radius {1}")]
    NonPositiveRadius(usize, f64),
    #[error("contact {0} has zero edge vector")]
    ZeroEdgeVector(usize),
    #[error("contact {k} references vertex {v} out of range (n = {n})")]
    VertexOutOfRange { k: usize, v: usize, n: usize },
    #[error("contact {0} is a self-contact with zero offset")]
    DegenerateSelfContact(usize),
    #[error("matrix contains a NaN or infinite entry")]
    NonFiniteEntry,
    #[error("linear program dimension mismatch: row has {got} coefficients, expected {expected}")]
    LpDimensionMismatch { got: usize, expected: usize },
    #[error("linear program did not converge")]
    LpNonConvergence,
    #[error("operation requires dimension {expected}, framework has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("edges {0} and {1} cross; framework is not a planar embedding")]
    EdgeCrossing(usize, usize),
    #[error("face tracing produced Euler characteristic {0}, expected 0 on the torus")]
    EulerViolation(i64),
    #[error("no contact tour realizes lattice generator {0}")]
    MissingTour(usize),
    #[error("edge flex cycle sum violated on face {face} (residual {residual:.3e})")]
    InconsistentCycleSum { face: usize, residual: f64 },
    #[error("grid resolution must be at least 2, got {0}")]
    BadResolution(usize),
    #[error("degenerate pentagon: cot(beta-alpha) = cot(gamma-alpha)")]
    DegeneratePentagon,
    #[error("pentagon angles leave no root in the bracket")]
    NoRootInBracket,
    #[error("phase pair (1, 1) is excluded")]
    TrivialPhasePair,
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),
    #[error("tolerance must be non-negative, got {0}")]
    NegativeTolerance(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
