use alloc::string::String;

/// Everything that can go wrong in the geometry, dynamics and verification layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} components, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("a vector in R^(d+1) needs at least 2 components (d >= 1), found {found}")]
    TooFewComponents { found: usize },

    #[error("non-finite component in input")]
    NonFinite,

    #[error("point is off the hyperboloid: |<x,x>_M + 1| = {residual:.3e} (tolerance {tolerance:.3e})")]
    NotOnHyperboloid { residual: f64, tolerance: f64 },

    #[error("point lies on the lower sheet (x^0 = {x0})")]
    LowerSheet { x0: f64 },

    #[error("vector is not tangent: |<x,v>_M| = {residual:.3e} (tolerance {tolerance:.3e})")]
    NotTangent { residual: f64, tolerance: f64 },

    #[error("cannot project onto the hyperboloid: <x,x>_M = {norm_sq} is not negative or x^0 <= 0")]
    ProjectionFailure { norm_sq: f64 },

    #[error("tangent vector has negative squared norm {value:.3e}")]
    NegativeNormSquared { value: f64 },

    #[error("geodesic direction must have unit or zero norm, found {norm}")]
    NonUnitDirection { norm: f64 },

    #[error("triangle is degenerate (sinh factor {factor:.3e} below {tolerance:.1e})")]
    DegenerateTriangle { factor: f64, tolerance: f64 },

    #[error("operation requires d = {expected}, got d = {found}")]
    UnsupportedDimension { expected: usize, found: usize },

    #[error("particle index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("state corrupted at particle {particle}: constraint residual {residual:.3e}")]
    StateCorruption { particle: usize, residual: f64 },

    #[error("integration blew up at t = {t} (particle {particle})")]
    BlowUp { t: f64, particle: usize },

    #[error("value overflowed the floating range in {context}")]
    Overflow { context: &'static str },

    #[error("state is not on the geodesic (max residual {residual:.3e})")]
    ReductionNotApplicable { residual: f64 },

    #[error("invalid configuration value for `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },

    #[error("oracle integration failed: {reason}")]
    OracleFailure { reason: &'static str },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
