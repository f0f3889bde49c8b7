use thiserror::Error;

/// Errors reported by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("invalid load: {0}")]
    InvalidLoad(String),
    #[error("angular quadrature did not converge: {0}")]
    Refinement(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid mesh parameter: {0}")]
    InvalidMesh(String),
    #[error("linear solver breakdown: {0}")]
    Solver(String),
    #[error("point ({x}, {y}) lies outside the mesh")]
    OutsideMesh { x: f64, y: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
