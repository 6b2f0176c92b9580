//! B-spline Galerkin discretisation of nonlinear elliptic problems solved by
//! multigrid-preconditioned Picard iteration, with MPE, RRE and Anderson
//! acceleration of the outer fixed-point loop.

pub mod bench;
pub mod bspline;
pub mod error;
pub mod extrapolation;
pub mod history;
pub mod iga;
pub mod linalg;
pub mod multigrid;
pub mod nonlinear;

pub use error::{Error, Result};
