//! Holomorphic self-maps of the projective plane.

pub mod fiber;
pub mod point;
pub mod projmap;

pub use fiber::{multiplicity_near, Fiber, SolvedPoints, WeightedPoint};
pub use point::ProjPoint;
pub use projmap::{random_form, unit_disk, LogOrbit, ProjMap};
