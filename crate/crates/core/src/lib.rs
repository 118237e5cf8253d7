//! Kernel interpolation and numerical differentiation with polyharmonic
//! kernels on node sets that need not be determining for the attached
//! polynomial space.

mod dense;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod kernels;
pub mod poly;
pub mod recovery;
pub mod solver;

pub use error::{Error, Result};
pub use kernels::KernelSpec;
pub use poly::{NodeSet, PolySpace};
pub use solver::Tolerances;
