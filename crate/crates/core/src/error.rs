use thiserror::Error;

use crate::geometry::Label;

/// Errors raised anywhere in the library.
///
/// The CLI maps groups of variants onto stable exit codes, see
/// [`crate::cli::ExitCode`].
#[derive(Debug, Error)]
pub enum Error {
    // mesh / measure
    #[error("region {region} has an open boundary ({open_edges} unmatched edges)")]
    OpenSurface { region: u32, open_edges: usize },
    #[error("region {region} has inconsistent face orientation at edge ({a}, {b})")]
    OrientationError { region: u32, a: u32, b: u32 },
    #[error("edge ({a}, {b}) has {valence} incident faces; only 2 or 3 are allowed")]
    InvalidValence { a: u32, b: u32, valence: usize },
    #[error("face {face} is degenerate (zero area)")]
    DegenerateTriangle { face: usize },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    // catalogue
    #[error("volume must be positive, got {0}")]
    NonPositiveVolume(f64),
    #[error("invalid configuration: {0}")]
    InvalidSpec(String),
    #[error("standard triple bubble needs three equal volumes (balls with equal radii intersected with wedges), got {0:?}")]
    NonEqualVolumes(Vec<f64>),
    #[error("resolution too coarse: {subdivisions} lattice rings per lobe, need at least 3")]
    ResolutionTooCoarse { subdivisions: usize },
    #[error("requested placement overlaps region interiors: {0}")]
    OverlapError(String),
    #[error("tangency requested on the interface plane / junction circle")]
    TangencyOnInterface,
    #[error("middle volume {requested} outside the feasible range; feasible per branch: {feasible}")]
    VolumeOutOfRange { requested: f64, feasible: String },
    #[error("middle volume {requested} is attainable by branches {branches:?}; give a branch hint")]
    BranchAmbiguity { requested: f64, branches: Vec<String> },
    #[error("root solver failed: {0}")]
    SolverFailure(String),
    #[error("profile integration failed: {0}")]
    IntegrationFailure(String),
    #[error("profile radius pinches off at arclength {at}")]
    PinchOff { at: f64 },

    // variation
    #[error("volume gradients are linearly dependent (rank {rank} of {k})")]
    RankDeficient { rank: usize, k: usize },
    #[error("input is not convex (defect {defect:.3e}, region {region})")]
    NonConvexInput { region: u32, defect: f64 },
    #[error("curvature unavailable on {excluded_fraction:.1}% of the area")]
    CurvatureUnavailable { excluded_fraction: f64 },

    // flow / classify
    #[error("mesh degeneracy: {0}")]
    MeshDegeneracy(String),
    #[error("no convergence after {steps} steps (residual_rel {residual_rel:.3e})")]
    NonConvergence { steps: usize, residual_rel: f64 },
    #[error("region {region} violates the convexity hypothesis (defect {defect:.3e})")]
    ConvexityViolation { region: u32, defect: f64 },
    #[error("classification supports k in {{1,2,3}}, got {0}")]
    UnsupportedK(usize),

    // io
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("label {0} not present in mesh")]
    MissingLabel(Label),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
