use thiserror::Error;

/// Errors raised anywhere in the curvature pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: argument {value} outside the function domain")]
    Domain { op: &'static str, value: f64 },

    #[error(
        "quadrature did not converge on [{a}, {b}] at depth {depth}: coefficient ({ca},{cb}) changed by {rel_change:e} (relative)"
    )]
    Convergence {
        a: f64,
        b: f64,
        depth: usize,
        ca: usize,
        cb: usize,
        rel_change: f64,
    },

    #[error("chain size {n_sites} outside the supported range 1..=14")]
    Size { n_sites: usize },

    #[error("periodic boundary needs at least 3 sites, got {n_sites}")]
    Boundary { n_sites: usize },

    #[error("eigensolver failed: {detail}")]
    Eigen { detail: String },

    #[error(
        "finite-difference levels disagree on coefficient ({ca},{cb}): relative difference {rel_diff:e} exceeds {tol:e}"
    )]
    Precision {
        ca: usize,
        cb: usize,
        rel_diff: f64,
        tol: f64,
    },

    #[error("degenerate metric: det g = {det_g:e} with g11 = {g11:e}, g22 = {g22:e}")]
    DegenerateMetric { det_g: f64, g11: f64, g22: f64 },

    #[error(
        "curvature formulas disagree: determinant form {det_form:e}, contraction form {contraction_form:e}"
    )]
    InternalMismatch {
        det_form: f64,
        contraction_form: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient data: {ok} usable points out of {total}")]
    InsufficientData { ok: usize, total: usize },

    #[error("non-positive curvature {r:e} at T = {t} prevents a log-log fit")]
    NonPositiveCurvature { t: f64, r: f64 },
}

impl Error {
    /// Short machine-readable tag for the error family.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Convergence { .. } => "convergence",
            Error::Size { .. } => "size",
            Error::Boundary { .. } => "boundary",
            Error::Eigen { .. } => "eigen",
            Error::Precision { .. } => "precision",
            Error::DegenerateMetric { .. } => "degenerate_metric",
            Error::InternalMismatch { .. } => "internal_mismatch",
            Error::Config(_) => "config",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::NonPositiveCurvature { .. } => "non_positive_curvature",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
