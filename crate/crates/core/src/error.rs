use thiserror::Error;

use crate::oscquad::QuadResult;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("interval [{left}, {right}] must contain 0 in its interior")]
    BadInterval { left: f64, right: f64 },
    #[error("cutoff radii must satisfy 0 < r1 < r2 (got r1 = {r1}, r2 = {r2})")]
    BadCutoff { r1: f64, r2: f64 },
    #[error("cutoff support [-{r2}, {r2}] is not inside ({left}, {right})")]
    CutoffOutsideInterval { r2: f64, left: f64, right: f64 },
    #[error("parameter {name} must be positive and finite (got {value})")]
    BadParameter { name: &'static str, value: f64 },
}

#[derive(Debug, Error, Clone)]
pub enum QuadError {
    #[error("tolerance not met after {panels} panels (estimate {:.6e}, error {:.3e})", best.value, best.error)]
    ToleranceNotMet { best: QuadResult, panels: usize },
    #[error("brute-force grid needs {points} points, cap is {cap}")]
    GridTooLarge { points: u64, cap: u64 },
    #[error("invalid quadrature input: {0}")]
    BadInput(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("phase is not degenerate at 0 (vanishing order {0} < 2)")]
    NotDegenerate(usize),
    #[error("phase is constant")]
    ConstantPhase,
    #[error("phase derivative has {0} extra zero(s) in the interval")]
    ExtraStationaryPoint(usize),
    #[error("contact order {0} is below 2; use the generalized coefficient instead")]
    ContactOrderTooLow(usize),
    #[error("declared order {declared} of {what} does not match actual order {actual:?}")]
    OrderMismatch {
        what: &'static str,
        declared: usize,
        actual: Option<usize>,
    },
}

#[derive(Debug, Error, Clone)]
pub enum SolverError {
    #[error("solver grid would exceed {cap} nodes")]
    GridTooCoarse { cap: usize },
    #[error("Neumann series diverging (increment ratios {0:.3} and {1:.3})")]
    SeriesDiverging(f64, f64),
    #[error("ODE step size underflow at x = {0}")]
    StepUnderflow(f64),
    #[error("basis matrix ill-conditioned at every evaluation point (best condition number {0:.3e})")]
    IllConditioned(f64),
    #[error("not available in the coupled regime (mu_m = {0:.3})")]
    RegimeViolation(f64),
    #[error("t22 is numerically zero (|t22| = {0:.3e})")]
    SingularT22(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("need at least {needed} positive data points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Catch-all error for callers that mix subsystems.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}
