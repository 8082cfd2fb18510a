//! Polynomial arithmetic: homogeneous forms, local series, roots, systems.

pub mod homog;
pub mod parse;
pub mod series;
pub mod system;
pub mod univariate;

pub use homog::{exponents, jacobian_determinant, monomial_count, monomial_index, HomogPoly3};
pub use series::{recenter_taylor, vanishing_order, AffineSeries2, TrackedSeries, EPS_COEF, SERIES_TOL};
pub use system::{
    local_intersection_multiplicity, solve_affine_system, solve_with_options, AffineSolution,
    SolveOptions,
};
pub use univariate::{roots_univariate, roots_with_options, Root, RootOptions, Roots, UnivariatePoly};
