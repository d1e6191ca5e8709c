//! Constant spacetime mean curvature (STCMC) surfaces and foliations of
//! asymptotically Euclidean initial data sets, together with the
//! asymptotic charges they define.

pub mod acceptance;
pub mod charges;
pub mod chart;
pub mod dual;
pub mod error;
pub mod solver;
pub mod sphere;
pub mod surface;

pub use error::{Result, StcmcError};
