use thiserror::Error;

/// Errors raised by the geometry and surgery routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ambient dimension {0} too small (need n >= 2, i.e. at least 3 coordinates)")]
    DimensionTooSmall(usize),

    #[error("vector is not a future-pointing timelike vector (<v,v> = {norm})")]
    NotOnHyperboloid { norm: f64 },

    #[error("vector is not tangent: <w,p> = {residual}")]
    NotTangent { residual: f64 },

    #[error("vector is not spacelike (<v,v> = {norm})")]
    NotSpacelike { norm: f64 },

    #[error("upper half-space point needs a positive last coordinate, got {0}")]
    NotInUpperHalfSpace(f64),

    #[error("points are not at a valid hyperbolic separation (-<p,q> = {0})")]
    InvalidSeparation(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} outside valid range {lo}..{hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("sampled path violates unit speed at sample {index}: step length {step}, expected {expected}")]
    NotUnitSpeed { index: usize, step: f64, expected: f64 },

    #[error("curvature bound {0} is not below 1")]
    CurvatureTooLarge(f64),

    #[error("path endpoints coincide")]
    CoincidentEndpoints,

    #[error("degenerate tangent plane at node ({i}, {j})")]
    DegenerateSurface { i: usize, j: usize },

    #[error("intrinsic geodesic left the surface patch after {steps} steps")]
    LeftPatch { steps: usize },

    #[error("meridian length {0} is below e^3 * pi")]
    MeridianTooShort(f64),

    #[error("radius {r} outside the tube domain [{lo}, {hi}]")]
    OutsideTube { r: f64, lo: f64, hi: f64 },

    #[error("({p}, {q}) is not a primitive class")]
    NotPrimitive { p: String, q: String },

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Domain errors are mathematically meaningful rejections of otherwise
    /// well-formed input; everything else is malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::CurvatureTooLarge(_)
                | Error::MeridianTooShort(_)
                | Error::OutsideTube { .. }
                | Error::ConstraintViolated(_)
                | Error::DegenerateSurface { .. }
                | Error::LeftPatch { .. }
                | Error::CoincidentEndpoints
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
