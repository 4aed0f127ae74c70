use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: k = {k}, n = {n} (need 2 <= k <= n)")]
    InvalidDimension { k: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("the prescribed point must satisfy |y| < 1, got |y| = {0}")]
    PointOutsideBall(f64),

    #[error("point lies outside the closed unit ball (|x| = {0})")]
    OutsideDomain(f64),

    #[error("field evaluated too close to its singular point (|x - y| = {dist:e} < r_min = {r_min:e})")]
    Singular { dist: f64, r_min: f64 },

    #[error("frame is not orthonormal (max Gram deviation {0:e})")]
    NonOrthonormalFrame(f64),

    #[error("invalid finite-difference step h = {0}")]
    InvalidStep(f64),

    #[error("finite-difference stencil leaves the admissible domain")]
    StencilOutsideDomain,

    #[error("inadmissible surface parameters: {0}")]
    InadmissibleSurface(String),

    #[error("surface does not pass through y (distance {0:e})")]
    MissesPoint(f64),

    #[error("slice radius r = {0} is too large for a single transversal intersection")]
    RadiusTooLarge(f64),

    #[error("sample at distance {dist:e} from y lies inside the excluded ball of radius {r:e}")]
    SampleInsideExclusion { dist: f64, r: f64 },

    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("solver aborted at iteration {iteration}: minimum angle {min_angle_deg:.3} deg below threshold")]
    SolverDegenerate { iteration: usize, min_angle_deg: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that mean the requested instance violates a hypothesis or the
    /// input is malformed, as opposed to a failed numerical check.
    pub fn is_instance_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
