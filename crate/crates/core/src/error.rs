use thiserror::Error;

/// Errors surfaced by construction and verification routines.
#[derive(Debug, Error)]
pub enum GaudinError {
    #[error("unsupported algebra name: {0}")]
    UnsupportedAlgebra(String),

    #[error("coincident marked points: z[{i}] == z[{j}]")]
    CoincidentPoints { i: usize, j: usize },

    #[error("factor index {index} out of range (N = {n})")]
    FactorIndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mixed scalar fields in one operation")]
    MixedFields,

    #[error("operators do not commute: {context} (residual {residual:.3e})")]
    NonCommuting { context: String, residual: f64 },

    #[error("subspace is not invariant under generator `{label}` (residual {residual:.3e})")]
    NotInvariant { label: String, residual: f64 },

    #[error("operator is not Hermitian w.r.t. the Gram form (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("Gram form is not positive definite")]
    GramNotPositive,

    #[error("eigenvalue-to-oper calibration failed: {0}")]
    CalibrationFailure(String),

    #[error("Bethe root w[{j}] collides with marked point z[{i}]")]
    RootCollision { j: usize, i: usize },

    #[error("Miura oper has an uncancelled pole at w[{j}] (coefficient {coeff:.3e})")]
    PoleNotCancelled { j: usize, coeff: f64 },

    #[error("Frobenius recursion hit a zero pivot at order {order} before the resonance")]
    ZeroPivot { order: usize },

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("malformed operad tree: {0}")]
    MalformedTree(String),

    #[error("eigenvalue gap collapsed below floor ({gap:.3e} < {floor:.3e}) at path parameter {s}")]
    GapCollapse { gap: f64, floor: f64, s: f64 },

    #[error("ambiguous eigenline matching after refinement to the minimum step (overlap {overlap:.3})")]
    AmbiguousMatching { overlap: f64 },

    #[error("collar crossover inconsistency: overlap {overlap:.4} below {required}")]
    CollarMismatch { overlap: f64, required: f64 },

    #[error("spectrum is not simple at the start of the path")]
    NotSimpleAtStart,

    #[error("rescaled generator family diverges along the collision schedule")]
    Divergence,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, GaudinError>;
