use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} is within the pole tolerance of the projection axis")]
    PoleProjection { point: Vec<f64> },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("arity error: {0}")]
    Arity(String),

    #[error("point {point:?} lies outside the declared domain {domain}")]
    Domain { point: Vec<f64>, domain: String },

    #[error("mollifier width {width} is below twice the mesh spacing {spacing}")]
    WidthTooSmall { width: f64, spacing: f64 },

    #[error("map value at node {node} has norm {norm} below the renormalisation floor")]
    NearZeroValue { node: usize, norm: f64 },

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("mesh has no boundary part {0}")]
    MissingBoundary(String),

    #[error("curve value at t = {t} has norm {norm}, not on the unit circle")]
    NotOnCircle { t: f64, norm: f64 },

    #[error("map is not sphere-valued at {point:?} (norm {norm})")]
    NotSphereValued { point: Vec<f64>, norm: f64 },

    #[error("degree estimate {value} is {residual} away from an integer")]
    UnreliableDegree { value: f64, residual: f64 },

    #[error("winding estimate {value} is {residual} away from an integer")]
    UnreliableWinding { value: f64, residual: f64 },

    #[error("fixed point encountered at {point:?} (|f(x) - x| = {defect})")]
    FixedPointEncountered { point: Vec<f64>, defect: f64 },

    #[error("antipodal coincidence at {point:?} (|f(x) - f(-x)| = {defect})")]
    CoincidenceEncountered { point: Vec<f64>, defect: f64 },

    #[error("projected sets are not separated: distance {distance} < {required}")]
    NotSeparated { distance: f64, required: f64 },

    #[error("a meridian meets both X and -X (projection distance {distance})")]
    MeridianConditionViolated { distance: f64 },

    #[error("point {point:?} of X lies in a polar cap of half-angle {radius}")]
    CapConditionViolated { point: Vec<f64>, radius: f64 },

    #[error("mollified latitude profile leaves its band: {0}")]
    MollifyRangeViolated(String),

    #[error("constructed diffeomorphism fails X in psi(upper hemisphere) at {point:?}")]
    ImageConditionFailed { point: Vec<f64> },

    #[error("composed map comes within {distance} of the pole at {point:?}")]
    PoleHit { point: Vec<f64>, distance: f64 },

    #[error("strip half-width {r} too wide: {reason}")]
    StripTooWide { r: f64, reason: String },

    #[error("g† and -g_* coincide within tolerance at {point:?}")]
    SeparationLost { point: Vec<f64> },

    #[error("graft denominator vanishes at {point:?}, t = {t}")]
    DenominatorVanishes { point: Vec<f64>, t: f64 },

    #[error("hemisphere preservation violated at {point:?}")]
    HemispherePreservationViolated { point: Vec<f64> },

    #[error("map is not constant on the vertical line at angle {angle} (spread {spread})")]
    NotConstantOnV { angle: f64, spread: f64 },

    #[error("no regular value found in {trials} trials: {detail}")]
    NoRegularValueFound { trials: usize, detail: String },

    #[error("no admissible pole found in {0} trials")]
    NoPoleFound(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
