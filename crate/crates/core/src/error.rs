use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Variants carry enough context for the CLI to map them onto
/// machine-readable codes (see [`Error::code`]).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("center lies on the hyperplane at infinity of chart {chart}")]
    ChartUndefined { chart: usize },

    #[error("all retained coefficients up to degree {truncation} vanish; raise the truncation")]
    OrderExceedsTruncation { truncation: usize },

    #[error("system is positive dimensional (resultant vanishes identically)")]
    PositiveDimensional,

    #[error("back-substitution is ambiguous near u = {re:.6}{im:+.6}i")]
    IllConditioned { re: f64, im: f64 },

    #[error("map is degenerate: common zero at [{}]", fmt_point(.point))]
    DegenerateMap { point: [(f64, f64); 3] },

    #[error("component degrees differ: {0:?}")]
    DegreeMismatch([usize; 3]),

    #[error("degree must be at least {min}, got {got}")]
    DegreeTooSmall { min: usize, got: usize },

    #[error("polynomial solver failed in chart {chart}: {reason}")]
    SolverFailure { chart: usize, reason: String },

    #[error("local degree count did not stabilise: {sequence:?}")]
    Unstable { sequence: Vec<usize> },

    #[error("vanishing order slope {slope:.4} is not within 0.1 of an integer")]
    NonIntegerOrder { slope: f64 },

    #[error("component {index} is invalid: {reason}")]
    ComponentInvalid { index: usize, reason: String },

    #[error("point is not superattracting for the period iterate")]
    NotSuperattracting,

    #[error("no normal form applies at this point: {0}")]
    NoNormalForm(String),

    #[error("random generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("symmetric-square construction degenerated: {0}")]
    ConstructionDegenerate(String),

    #[error("point lies on the pulled-back curve at working precision")]
    OnCurve,

    #[error("slope fit unstable: residual {residual:.4} exceeds {limit}")]
    FitUnstable { residual: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn fmt_point(p: &[(f64, f64); 3]) -> String {
    p.iter()
        .map(|(re, im)| {
            if im.abs() < 1e-12 {
                format!("{re:.6}")
            } else {
                format!("{re:.6}{im:+.6}i")
            }
        })
        .collect::<Vec<_>>()
        .join(":")
}

impl Error {
    /// Stable identifier used in JSON error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ChartUndefined { .. } => "chart_undefined",
            Error::OrderExceedsTruncation { .. } => "order_exceeds_truncation",
            Error::PositiveDimensional => "positive_dimensional",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::DegenerateMap { .. } => "degenerate_map",
            Error::DegreeMismatch(_) => "degree_mismatch",
            Error::DegreeTooSmall { .. } => "degree_too_small",
            Error::SolverFailure { .. } => "solver_failure",
            Error::Unstable { .. } => "unstable",
            Error::NonIntegerOrder { .. } => "non_integer_order",
            Error::ComponentInvalid { .. } => "component_invalid",
            Error::NotSuperattracting => "not_superattracting",
            Error::NoNormalForm(_) => "no_normal_form",
            Error::GenerationFailed { .. } => "generation_failed",
            Error::ConstructionDegenerate(_) => "construction_degenerate",
            Error::OnCurve => "on_curve",
            Error::FitUnstable { .. } => "fit_unstable",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }

    /// Whether the error reflects a numerical failure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::DegreeMismatch(_)
                | Error::DegreeTooSmall { .. }
                | Error::InvalidArgument(_)
                | Error::DegenerateMap { .. }
                | Error::ComponentInvalid { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
