//! Two-dimensional asymptotic model of a thin anisotropic plate clamped along
//! its edge and supported on a small area around an interior point.

pub mod error;
pub mod fem2d;
pub mod jet;
pub mod material;
pub mod par;
pub mod plate;
pub mod polar;
pub mod extension;
pub mod fundsol;
pub mod green;
pub mod quadrature;
pub mod reconstruct;
pub mod report;
pub mod richardson;
pub mod poly;
pub mod tolerances;

pub use error::{Error, Result};
