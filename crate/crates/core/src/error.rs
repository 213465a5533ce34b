use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid truncation level {0} (must be >= 0)")]
    InvalidTruncationLevel(f64),
    #[error("structural assumption ({assumption}) violated at r = {radius}: {detail}")]
    StructuralViolation {
        assumption: &'static str,
        radius: f64,
        detail: String,
    },
    #[error("sigma = {sigma} outside the admissible window ({lower}, {upper})")]
    SigmaOutOfWindow { sigma: f64, lower: f64, upper: f64 },
    #[error("invalid grading ratio {0} (must lie in (0, 1])")]
    InvalidGrading(f64),
    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter {
        name: &'static str,
        constraint: &'static str,
    },
    #[error("element {0} has zero weighted measure")]
    DegenerateElement(usize),
    #[error("singular tridiagonal pivot at row {0}")]
    SingularPivot(usize),
    #[error("fixed point did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("discrete maximum principle violated: ||u|| - ||g|| = {margin:e}")]
    MaxPrincipleViolation { margin: f64 },
    #[error("datum is not bounded on the mesh quadrature")]
    UnboundedDatum,
    #[error("grid functions live on different meshes")]
    MeshMismatch,
    #[error("comparison hypothesis f <= g fails at r = {radius}")]
    HypothesisViolation { radius: f64 },
    #[error("empty n-list")]
    EmptyNList,
    #[error("n-list must be strictly increasing")]
    UnorderedNList,
    #[error("gamma = {0} is not supercritical (need gamma > 1)")]
    GammaNotSupercritical(f64),
    #[error("value out of range for the change of variables: {0}")]
    InvalidRange(&'static str),
    #[error("grid function must vanish at r = 1")]
    NotPinned,
}

pub type Result<T> = core::result::Result<T, Error>;
