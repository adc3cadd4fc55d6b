use drr_lp::LpError;

#[derive(Debug, thiserror::Error)]
pub enum DrrError {
    #[error("malformed case at line {line}, column {column}: {message}")]
    MalformedCase {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("case file has no `mpc.{0}` table")]
    MissingTable(String),
    #[error("inconsistent dimensions: {0}")]
    InconsistentDimensions(String),
    #[error("generator index {0} does not exist or is out of service")]
    UnknownGenerator(usize),
    #[error("generator {0} designated as renewable more than once")]
    DuplicateDesignation(usize),
    #[error("invalid renewable designation: {0}")]
    InvalidRenewable(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("network is not connected: {0}")]
    Islanded(String),
    #[error("initial dispatch infeasible (aggregate shortfall {shortfall_mw:.3} MW)")]
    InfeasibleDispatch { shortfall_mw: f64 },
    #[error("cost curve of {0} is malformed")]
    UnboundedCost(String),
    #[error("singular network: {0}")]
    SingularNetwork(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("big-M value {0} is binding; re-solve with a larger M")]
    BigMTooSmall(f64),
    #[error("facet {0} has a zero normal")]
    ZeroNormal(usize),
    #[error("cut normal vanishes (norm {0:e})")]
    DegenerateCut(f64),
    #[error("the region is empty")]
    EmptyRegion,
    #[error("case has no renewable generators")]
    NoRenewables,
    #[error("facet {0} does not touch the region")]
    FacetInfeasible(usize),
    #[error("facet {0} has no physical binding constraint and no initial-box origin")]
    AmbiguousFacet(usize),
    #[error("operation supports at most 2 dimensions, got {0}")]
    DimensionTooHigh(usize),
    #[error("all {0} scenarios failed; first error: {1}")]
    AllScenariosFailed(usize, String),
    #[error("solver: {0}")]
    Lp(#[from] LpError),
    #[error("unexpected solver status: {0}")]
    SolverStatus(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DrrError>;
