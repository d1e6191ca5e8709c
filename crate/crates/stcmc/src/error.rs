use thiserror::Error;

/// Every failure the toolkit can report. Numerical failures carry enough
/// context to reproduce the offending evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StcmcError {
    #[error("point {point:?} lies inside the excised core (|x| = {radius} < {inner})")]
    PointInsideCore { point: [f64; 3], radius: f64, inner: f64 },

    #[error("point {point:?} reaches the horizon of the Schwarzschild chart")]
    HorizonReached { point: [f64; 3] },

    #[error("graphical slice is not spacelike at {point:?} (1 - N^2 |dT|^2 = {margin})")]
    SliceNotSpacelike { point: [f64; 3], margin: f64 },

    #[error("metric is singular or indefinite at {point:?}")]
    SingularMetric { point: [f64; 3] },

    #[error("band limit {requested} is below the minimum {minimum}")]
    BandLimitTooSmall { requested: usize, minimum: usize },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("radius must be positive, got {0}")]
    NonpositiveRadius(f64),

    #[error("surface meets a trapped region: H^2 < P^2 at node {node} (H = {h}, P = {p})")]
    TrappedRegion { node: usize, h: f64, p: f64 },

    #[error("induced metric is degenerate at node {node} (det = {det:e})")]
    DegenerateInducedMetric { node: usize, det: f64 },

    #[error("eigenvalue solver failed: {0}")]
    EigenSolverFailure(String),

    #[error("background foliation is not supported: {0}")]
    FoliationNotSupported(String),

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("Newton iteration hit the cap of {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("continuation stalled at tau = {tau} with step {step}")]
    ContinuationStalled { tau: f64, step: f64 },

    #[error("energy-momentum vector is not timelike (E = {energy}, |P| = {momentum})")]
    SpacelikeEnergyMomentum { energy: f64, momentum: f64 },

    #[error("energy is zero; center integrals are undefined")]
    ZeroEnergy,

    #[error("matrix is not orthogonal (deviation {0:e})")]
    NotOrthogonal(f64),

    #[error("need at least {needed} leaves or radii, got {got}")]
    InsufficientLeaves { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl StcmcError {
    /// Configuration errors are caller mistakes; everything else is a
    /// numerical failure of a well-posed request.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            StcmcError::InvalidConfig(_)
                | StcmcError::BandLimitTooSmall { .. }
                | StcmcError::NonpositiveRadius(_)
                | StcmcError::NotOrthogonal(_)
                | StcmcError::InsufficientLeaves { .. }
                | StcmcError::ShapeMismatch { .. }
                | StcmcError::FoliationNotSupported(_)
        )
    }

    /// Short stable name, used by the CLI and the C interface.
    pub fn kind(&self) -> &'static str {
        match self {
            StcmcError::PointInsideCore { .. } => "PointInsideCore",
            StcmcError::HorizonReached { .. } => "HorizonReached",
            StcmcError::SliceNotSpacelike { .. } => "SliceNotSpacelike",
            StcmcError::SingularMetric { .. } => "SingularMetric",
            StcmcError::BandLimitTooSmall { .. } => "BandLimitTooSmall",
            StcmcError::ShapeMismatch { .. } => "ShapeMismatch",
            StcmcError::NonpositiveRadius(_) => "NonpositiveRadius",
            StcmcError::TrappedRegion { .. } => "TrappedRegion",
            StcmcError::DegenerateInducedMetric { .. } => "DegenerateInducedMetric",
            StcmcError::EigenSolverFailure(_) => "EigenSolverFailure",
            StcmcError::FoliationNotSupported(_) => "FoliationNotSupported",
            StcmcError::NewtonDiverged { .. } => "NewtonDiverged",
            StcmcError::MaxIterations { .. } => "MaxIterations",
            StcmcError::ContinuationStalled { .. } => "ContinuationStalled",
            StcmcError::SpacelikeEnergyMomentum { .. } => "SpacelikeEnergyMomentum",
            StcmcError::ZeroEnergy => "ZeroEnergy",
            StcmcError::NotOrthogonal(_) => "NotOrthogonal",
            StcmcError::InsufficientLeaves { .. } => "InsufficientLeaves",
            StcmcError::InvalidConfig(_) => "InvalidConfig",
        }
    }
}

pub type Result<T> = std::result::Result<T, StcmcError>;
