use thiserror::Error;

/// Errors raised by every stage of the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("point {point:?} lies outside the domain (signed distance {signed_distance:e})")]
    PointOutsideDomain { point: Vec<f64>, signed_distance: f64 },
    #[error("point is too close to the boundary for a finite-difference step: d = {d:e}, h = {h:e}")]
    TooCloseToBoundary { d: f64, h: f64 },
    #[error("no scan grid point lands in the requested region")]
    EmptyRegion,
    #[error("invalid grading {0}: expected a ratio in (0, 1]")]
    InvalidGrading(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mesh generation failed: {0}")]
    MeshGenerationFailure(String),
    #[error("strip ({delta_out}, {delta_in}) is too thin for the mesh: {layers} element layers (need at least 4)")]
    StripTooThin { delta_out: f64, delta_in: f64, layers: usize },
    #[error("expected a torus domain")]
    NotATorus,
    #[error("parse error at offset {offset}: found {found}, expected one of {expected:?}")]
    Parse { offset: usize, found: String, expected: Vec<String> },
    #[error("diffusion coefficient is not positive ({value:e}) at {point:?}")]
    NonpositiveDiffusion { value: f64, point: [f64; 3] },
    #[error("weight is not positive ({value:e}) at {point:?}")]
    NonpositiveWeight { value: f64, point: [f64; 3] },
    #[error("quadrature point {point:?} has zero distance to the boundary")]
    SingularQuadrature { point: [f64; 3] },
    #[error("IMS band [{delta_in}, {delta_out}] is narrower than 4 local mesh sizes ({mesh_size:e})")]
    DegenerateBand { delta_in: f64, delta_out: f64, mesh_size: f64 },
    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),
    #[error("method {method} is not applicable: {hypothesis}")]
    MethodNotApplicable { method: String, hypothesis: String },
    #[error("factorization of K - sigma*M failed at shift {shift:e}")]
    FactorizationFailure { shift: f64 },
    #[error("eigensolver did not converge after {iterations} iterations ({converged} of {requested} pairs converged)")]
    NoConvergence { iterations: usize, converged: usize, requested: usize, partial: Vec<f64> },
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
