//! Numerical dynamics of holomorphic self-maps of the complex projective plane.

pub mod error;
pub mod invariants;
pub mod map;
pub mod multiplicity;
pub mod poly;
pub mod potentials;

pub use error::{Error, Result};
pub use map::{Fiber, LogOrbit, ProjMap, ProjPoint};
pub use num_complex::Complex64;
pub use poly::*;
