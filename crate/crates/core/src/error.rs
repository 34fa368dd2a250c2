use thiserror::Error;

pub type Result<T, E = McfError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum McfError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("degenerate edge at vertex {index} (length {length:e})")]
    DegenerateEdge { index: usize, length: f64 },
    #[error("polyline is not simple: edges {first} and {second} intersect")]
    SelfIntersection { first: usize, second: usize },
    #[error("axis violation at vertex {index}: r = {r:e}")]
    AxisViolation { index: usize, r: f64 },
    #[error("resampling would leave {count} vertices (minimum 8)")]
    TooCoarse { count: usize },
    #[error("rescaling center must lie on the symmetry axis")]
    OffAxisCenter,
    #[error("time {t} is at or past the extinction time {extinction}")]
    PastExtinction { t: f64, extinction: f64 },
    #[error("only one flat factor (j = 1) is representable, got j = {0}")]
    UnsupportedFactorization(usize),
    #[error("parameter {0} outside the open interval (-pi/2, pi/2)")]
    DomainViolation(f64),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("soliton residual requires t < 0, got {0}")]
    NonNegativeTime(f64),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("step {dt:e} exceeds the stability limit {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("heat kernel evaluated at t = {t} >= t0 = {t0}")]
    NonBackwardTime { t: f64, t0: f64 },
    #[error("time {0} is not covered by the recorded history")]
    UncoveredTime(f64),
    #[error("geometry is not mean convex (min H = {0:e})")]
    NotMeanConvex(f64),
    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),
    #[error("history does not cover the backward window starting at {0}")]
    InsufficientHistory(f64),
    #[error("neck extent {extent} is shorter than the required {required}")]
    NeckTooShort { extent: f64, required: f64 },
    #[error("no admissible neck collection separates the trigger part at t = {time}: {detail}")]
    NoSeparatingNecks { time: f64, detail: String },
    #[error("initial data is not controlled: {0}")]
    NotControlled(String),
    #[error("time grids do not match: {0}")]
    GridMismatch(String),
    #[error("config error at key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
