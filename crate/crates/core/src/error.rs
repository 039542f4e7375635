use thiserror::Error;

use crate::geometry::SectionKind;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("radius {radius} is not positive at theta = {theta}")]
    NonPositiveRadius { theta: f64, radius: f64 },
    #[error("boundary is tangent to the rays from the origin at theta = {theta} (alignment {alignment})")]
    NotStarShaped { theta: f64, alignment: f64 },
    #[error("coefficients must be finite")]
    NonFiniteCoefficient,
    #[error("harmonic index k = 0 is reserved for a0")]
    ZeroHarmonic,
    #[error("{0:?} sections take no harmonics")]
    UnexpectedHarmonics(SectionKind),
    #[error("invalid section json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeshError {
    #[error("bad resolution: {0}")]
    BadResolution(String),
    #[error("cannot mesh a {0:?} section")]
    UnsupportedSection(SectionKind),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FemError {
    #[error("triangle {index} is degenerate (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("solver stagnated: relative residual {residual:e} after {iterations} iterations")]
    SolverStagnation { iterations: usize, residual: f64 },
    #[error("bordered system is singular")]
    IncompatibleSystem,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error("field has a non-finite value at vertex {0}")]
    NonFinite(usize),
    #[error("constraint vector is zero")]
    ZeroConstraint,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PoiseuilleError {
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error("invalid friction ratio {0}")]
    InvalidAlpha(f64),
    #[error("invalid flux {0}")]
    InvalidFlux(f64),
    #[error("series order must be at least 1")]
    BadOrder,
    #[error("series diverges: alpha * ratio = {product} >= 1")]
    DivergentSeries { product: f64 },
    #[error("Dirichlet gap {gap:e} exceeds 1.2 x bound {bound:e} at alpha = {alpha}")]
    GapBoundViolated { alpha: f64, gap: f64, bound: f64 },
    #[error("alpha grid is empty")]
    EmptyGrid,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GrowthError {
    #[error("invalid growth parameters: {0}")]
    InvalidSpec(String),
    #[error("envelope step too coarse: doubling steps moved the endpoint by {relative_change:e}")]
    StepTooCoarse { relative_change: f64 },
    #[error("malformed samples: {0}")]
    MalformedSamples(String),
}
