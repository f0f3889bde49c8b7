//! Meshes and finite element solvers for the membrane and bending problems.

pub mod mesh;
pub mod sparse;

pub use mesh::{build_mesh, Domain, Mesh};
pub mod inplane;
pub mod recovery;

pub use inplane::{Field2, InplaneSystem};
pub use recovery::{evaluate_point, PointField};
pub mod bending;

pub use bending::{BendingDirichlet, BendingLoad, BendingSystem, Field3};

use crate::error::Result;
use nalgebra::Matrix3;
use std::sync::Arc;

/// Factorized membrane and bending systems on one mesh.
#[derive(Debug)]
pub struct PlateSystem {
    pub mesh: Arc<Mesh>,
    pub inplane: InplaneSystem,
    pub bending: BendingSystem,
}

impl PlateSystem {
    pub fn new(mesh: Arc<Mesh>, a0: &Matrix3<f64>) -> Result<Self> {
        let (inplane, bending) = crate::par::join(
            || InplaneSystem::new(mesh.clone(), a0),
            || BendingSystem::new(mesh.clone(), a0),
        );
        Ok(Self { mesh, inplane: inplane?, bending: bending? })
    }

    pub fn build(domain: &Domain, h: f64, a0: &Matrix3<f64>) -> Result<Self> {
        Self::new(Arc::new(build_mesh(domain, h)?), a0)
    }
}
