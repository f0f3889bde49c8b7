//! Morley elements for the bending problem with an optional point constraint.
//!
//! Degrees of freedom are vertex values and normal derivatives at edge
//! midpoints along the global edge normal. The point condition at the origin
//! is enforced by one Lagrange multiplier, eliminated through the bordered
//! system `K u = f - lambda e_O`, `u_O = 0`.

use super::inplane::{bary_point, recovery_seed};
use super::mesh::Mesh;
use super::recovery::{fit_quadratic, PointField};
use super::sparse::{dot, Cholesky, Csr};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::par;
use crate::plate;
use crate::quadrature::triangle_rule;
use crate::tolerances;
use nalgebra::{Matrix3, Matrix6, SMatrix, Vector6};
use std::sync::Arc;

pub type ScalarFn<'a> = &'a (dyn Fn([f64; 2]) -> f64 + Sync);
pub type GradFn<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);

/// Transverse load `(g, v) = (value, v) + (grad_part, grad v)`.
#[derive(Clone, Copy)]
pub struct BendingLoad<'a> {
    pub value: Option<ScalarFn<'a>>,
    pub grad_part: Option<GradFn<'a>>,
}

impl<'a> BendingLoad<'a> {
    pub fn none() -> Self {
        Self { value: None, grad_part: None }
    }

    pub fn value(f: ScalarFn<'a>) -> Self {
        Self { value: Some(f), grad_part: None }
    }
}

/// Clamped boundary data: value and gradient of the prescribed deflection.
pub type BendingDirichlet<'a> = &'a (dyn Fn([f64; 2]) -> (f64, [f64; 2]) + Sync);

/// Morley basis of one triangle in scaled centroid coordinates.
#[derive(Debug, Clone)]
pub struct MorleyBasis {
    center: [f64; 2],
    scale: f64,
    /// Column `j` holds the monomial coefficients of basis function `j`.
    coeffs: Matrix6<f64>,
}

impl MorleyBasis {
    pub fn new(mesh: &Mesh, t: usize) -> Result<Self> {
        let p = mesh.corners(t);
        let center = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        let scale = mesh.area(t).sqrt();
        let mut v = Matrix6::zeros();
        for k in 0..3 {
            let m = monomials(center, scale, p[k]);
            for j in 0..6 {
                v[(k, j)] = m[j];
            }
            let e = mesh.tri_edges[t][k];
            let mid = mesh.edge_midpoint(e);
            let n = mesh.edge_normal(e);
            let g = monomial_grads(center, scale, mid);
            for j in 0..6 {
                v[(3 + k, j)] = g[j][0] * n[0] + g[j][1] * n[1];
            }
        }
        let coeffs = v.try_inverse().ok_or_else(|| Error::InvalidMesh(format!("degenerate Morley element {t}")))?;
        Ok(Self { center, scale, coeffs })
    }

    pub fn values(&self, x: [f64; 2]) -> Vector6<f64> {
        let m = Vector6::from(monomials(self.center, self.scale, x));
        self.coeffs.transpose() * m
    }

    pub fn grads(&self, x: [f64; 2]) -> [[f64; 2]; 6] {
        let g = monomial_grads(self.center, self.scale, x);
        std::array::from_fn(|j| {
            let mut out = [0.0; 2];
            for k in 0..6 {
                out[0] += self.coeffs[(k, j)] * g[k][0];
                out[1] += self.coeffs[(k, j)] * g[k][1];
            }
            out
        })
    }

    /// Constant Hessians of the basis functions.
    pub fn hessians(&self) -> [[[f64; 2]; 2]; 6] {
        let s2 = self.scale * self.scale;
        std::array::from_fn(|j| {
            let c = self.coeffs.column(j);
            let hxy = c[4] / s2;
            [[2.0 * c[3] / s2, hxy], [hxy, 2.0 * c[5] / s2]]
        })
    }
}

fn monomials(c: [f64; 2], s: f64, x: [f64; 2]) -> [f64; 6] {
    let (u, v) = ((x[0] - c[0]) / s, (x[1] - c[1]) / s);
    [1.0, u, v, u * u, u * v, v * v]
}

fn monomial_grads(c: [f64; 2], s: f64, x: [f64; 2]) -> [[f64; 2]; 6] {
    let (u, v) = ((x[0] - c[0]) / s, (x[1] - c[1]) / s);
    [[0.0, 0.0], [1.0 / s, 0.0], [0.0, 1.0 / s], [2.0 * u / s, 0.0], [v / s, u / s], [0.0, 2.0 * v / s]]
}

pub(crate) fn morley_dofs(mesh: &Mesh, t: usize) -> [usize; 6] {
    let v = mesh.triangles[t];
    let e = mesh.tri_edges[t];
    let nv = mesh.num_vertices();
    [v[0], v[1], v[2], nv + e[0], nv + e[1], nv + e[2]]
}

fn element_matrix(basis: &MorleyBasis, area: f64, a0: &Matrix3<f64>) -> SMatrix<f64, 6, 6> {
    let h = basis.hessians();
    let k: Vec<nalgebra::Vector3<f64>> = h.iter().map(plate::bending_strain).collect();
    let mut m = SMatrix::<f64, 6, 6>::zeros();
    for i in 0..6 {
        let s = a0 * k[i] / 6.0;
        for j in 0..6 {
            m[(i, j)] = area * s.dot(&k[j]);
        }
    }
    m
}

#[derive(Debug)]
pub struct BendingSystem {
    mesh: Arc<Mesh>,
    a0: Matrix3<f64>,
    bases: Arc<Vec<MorleyBasis>>,
    stiffness: Csr,
    boundary_dof: Vec<bool>,
    interior_index: Vec<Option<usize>>,
    chol: Cholesky,
    /// Interior solution of `K z = e_O` for the point constraint.
    constraint: Vec<f64>,
}

/// Discrete deflection: vertex values, then edge normal derivatives.
#[derive(Debug, Clone)]
pub struct Field3 {
    pub mesh: Arc<Mesh>,
    pub bases: Arc<Vec<MorleyBasis>>,
    pub dofs: Vec<f64>,
    /// Lagrange multiplier of the point condition (zero when inactive).
    pub multiplier: f64,
    pub energy: f64,
    pub strain_energy: f64,
    pub load_work: f64,
}

impl BendingSystem {
    pub fn new(mesh: Arc<Mesh>, a0: &Matrix3<f64>) -> Result<Self> {
        let nt = mesh.num_triangles();
        let bases: Vec<MorleyBasis> = par::map_range(nt, |t| MorleyBasis::new(&mesh, t)).into_iter().collect::<Result<_>>()?;
        let blocks = par::map_range(nt, |t| element_matrix(&bases[t], mesh.area(t), a0));
        let n = mesh.num_vertices() + mesh.num_edges();
        let mut trip = Vec::with_capacity(36 * nt);
        for (t, k) in blocks.iter().enumerate() {
            let d = morley_dofs(&mesh, t);
            for i in 0..6 {
                for j in 0..6 {
                    trip.push((d[i], d[j], k[(i, j)]));
                }
            }
        }
        let stiffness = Csr::from_triplets(n, trip);
        let mut boundary_dof = mesh.boundary_vertex.clone();
        boundary_dof.extend(mesh.boundary_edge.iter().copied());
        let mut interior_index = vec![None; n];
        let mut m = 0;
        for (i, &b) in boundary_dof.iter().enumerate() {
            if !b {
                interior_index[i] = Some(m);
                m += 1;
            }
        }
        let chol = Cholesky::new(stiffness.submatrix(&interior_index, m))?;
        let o = interior_index[mesh.origin_vertex].ok_or_else(|| Error::InvalidMesh("origin on boundary".into()))?;
        let mut e = vec![0.0; m];
        e[o] = 1.0;
        let constraint = chol.solve(&e, tolerances::SPARSE_RESIDUAL)?;
        Ok(Self { mesh, a0: *a0, bases: Arc::new(bases), stiffness, boundary_dof, interior_index, chol, constraint })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn a0(&self) -> &Matrix3<f64> {
        &self.a0
    }

    pub fn stiffness(&self) -> &Csr {
        &self.stiffness
    }

    pub fn num_dofs(&self) -> usize {
        self.boundary_dof.len()
    }

    pub fn is_boundary_dof(&self, i: usize) -> bool {
        self.boundary_dof[i]
    }

    pub fn load_vector(&self, load: BendingLoad<'_>) -> Vec<f64> {
        let rule = triangle_rule(5);
        let mesh = &self.mesh;
        let locals = par::map_range(mesh.num_triangles(), |t| {
            let p = mesh.corners(t);
            let area = mesh.area(t);
            let b = &self.bases[t];
            let mut f = [0.0; 6];
            for q in &rule {
                let x = bary_point(&p, &q.bary);
                let w = q.weight * area;
                if let Some(g) = load.value {
                    let gv = g(x);
                    let phi = b.values(x);
                    for j in 0..6 {
                        f[j] += w * gv * phi[j];
                    }
                }
                if let Some(g) = load.grad_part {
                    let gv = g(x);
                    let dphi = b.grads(x);
                    for j in 0..6 {
                        f[j] += w * (gv[0] * dphi[j][0] + gv[1] * dphi[j][1]);
                    }
                }
            }
            f
        });
        let mut out = vec![0.0; self.num_dofs()];
        for (t, f) in locals.iter().enumerate() {
            let d = morley_dofs(mesh, t);
            for i in 0..6 {
                out[d[i]] += f[i];
            }
        }
        out
    }

    /// Boundary degrees of freedom interpolated from the data.
    pub fn dirichlet_vector(&self, data: BendingDirichlet<'_>) -> Vec<f64> {
        let mesh = &self.mesh;
        let nv = mesh.num_vertices();
        let mut u = vec![0.0; self.num_dofs()];
        for v in 0..nv {
            if self.boundary_dof[v] {
                u[v] = data(mesh.vertices[v]).0;
            }
        }
        for e in 0..mesh.num_edges() {
            if self.boundary_dof[nv + e] {
                let (_, g) = data(mesh.edge_midpoint(e));
                let n = mesh.edge_normal(e);
                u[nv + e] = g[0] * n[0] + g[1] * n[1];
            }
        }
        u
    }

    /// Interpolates a smooth deflection into the Morley space.
    pub fn interpolate(&self, data: BendingDirichlet<'_>) -> Field3 {
        let mesh = &self.mesh;
        let nv = mesh.num_vertices();
        let mut u = vec![0.0; self.num_dofs()];
        for v in 0..nv {
            u[v] = data(mesh.vertices[v]).0;
        }
        for e in 0..mesh.num_edges() {
            let (_, g) = data(mesh.edge_midpoint(e));
            let n = mesh.edge_normal(e);
            u[nv + e] = g[0] * n[0] + g[1] * n[1];
        }
        let strain_energy = 0.5 * self.stiffness.bilinear(&u, &u);
        Field3 {
            mesh: self.mesh.clone(),
            bases: self.bases.clone(),
            dofs: u,
            multiplier: 0.0,
            energy: strain_energy,
            strain_energy,
            load_work: 0.0,
        }
    }

    pub fn solve(&self, load: BendingLoad<'_>, dirichlet: Option<BendingDirichlet<'_>>, point_constraint: bool) -> Result<Field3> {
        let f = self.load_vector(load);
        let u0 = match dirichlet {
            Some(d) => self.dirichlet_vector(d),
            None => vec![0.0; self.num_dofs()],
        };
        self.solve_vectors(&f, &u0, point_constraint)
    }

    /// Solves `K u = f` on interior dofs with boundary values taken from `u0`.
    pub fn solve_vectors(&self, f: &[f64], u0: &[f64], point_constraint: bool) -> Result<Field3> {
        let n = self.num_dofs();
        let mut u: Vec<f64> = (0..n).map(|i| if self.boundary_dof[i] { u0[i] } else { 0.0 }).collect();
        let ku = self.stiffness.mul(&u);
        let m = self.constraint.len();
        let mut rhs = vec![0.0; m];
        for i in 0..n {
            if let Some(ii) = self.interior_index[i] {
                rhs[ii] = f[i] - ku[i];
            }
        }
        let mut x = self.chol.solve(&rhs, tolerances::SPARSE_RESIDUAL)?;
        let mut multiplier = 0.0;
        if point_constraint {
            let o = self.interior_index[self.mesh.origin_vertex].unwrap();
            multiplier = x[o] / self.constraint[o];
            for (xi, zi) in x.iter_mut().zip(&self.constraint) {
                *xi -= multiplier * zi;
            }
            x[o] = 0.0;
        }
        for i in 0..n {
            if let Some(ii) = self.interior_index[i] {
                u[i] = x[ii];
            }
        }
        let strain_energy = 0.5 * self.stiffness.bilinear(&u, &u);
        let load_work = dot(f, &u);
        Ok(Field3 {
            mesh: self.mesh.clone(),
            bases: self.bases.clone(),
            dofs: u,
            multiplier,
            energy: strain_energy - load_work,
            strain_energy,
            load_work,
        })
    }

    /// Smallest eigenvalue of the interior stiffness (dense; for coarse meshes).
    pub fn min_eigenvalue(&self) -> f64 {
        self.chol.matrix().to_dense().symmetric_eigenvalues().min()
    }
}

impl Field3 {
    pub fn element_dofs(&self, t: usize) -> Vector6<f64> {
        let d = morley_dofs(&self.mesh, t);
        Vector6::from_fn(|i, _| self.dofs[d[i]])
    }

    pub fn element_value(&self, t: usize, x: [f64; 2]) -> f64 {
        self.bases[t].values(x).dot(&self.element_dofs(t))
    }

    pub fn element_grad(&self, t: usize, x: [f64; 2]) -> [f64; 2] {
        let g = self.bases[t].grads(x);
        let d = self.element_dofs(t);
        let mut out = [0.0; 2];
        for j in 0..6 {
            out[0] += g[j][0] * d[j];
            out[1] += g[j][1] * d[j];
        }
        out
    }

    pub fn element_hessian(&self, t: usize) -> [[f64; 2]; 2] {
        let h = self.bases[t].hessians();
        let d = self.element_dofs(t);
        let mut out = [[0.0; 2]; 2];
        for j in 0..6 {
            for a in 0..2 {
                for b in 0..2 {
                    out[a][b] += h[j][a][b] * d[j];
                }
            }
        }
        out
    }

    pub fn value(&self, p: [f64; 2]) -> Result<f64> {
        let (t, _) = self.mesh.locate(p)?;
        Ok(self.element_value(t, p))
    }

    /// Vertex value (exact degree of freedom).
    pub fn vertex_value(&self, v: usize) -> f64 {
        self.dofs[v]
    }

    /// `L2` error and broken `H2`-seminorm error against an exact deflection.
    pub fn errors(
        &self,
        exact: ScalarFn<'_>,
        exact_hess: &(dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Sync),
    ) -> (f64, f64) {
        let rule = triangle_rule(5);
        let parts = par::map_range(self.mesh.num_triangles(), |t| {
            let p = self.mesh.corners(t);
            let area = self.mesh.area(t);
            let h = self.element_hessian(t);
            let (mut l2, mut h2) = (0.0, 0.0);
            for q in &rule {
                let x = bary_point(&p, &q.bary);
                l2 += q.weight * area * (self.element_value(t, x) - exact(x)).powi(2);
                let he = exact_hess(x);
                for a in 0..2 {
                    for b in 0..2 {
                        h2 += q.weight * area * (h[a][b] - he[a][b]).powi(2);
                    }
                }
            }
            (l2, h2)
        });
        let (l2, h2) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        (l2.sqrt(), h2.sqrt())
    }

    /// Recovered gradient at `p` of `w - s`, where `s` is a known function sampled at the patch vertices.
    pub fn recovered_gradient_minus(&self, p: [f64; 2], s: &dyn Fn([f64; 2]) -> f64) -> Result<[f64; 2]> {
        let mesh = &self.mesh;
        let seed = recovery_seed(mesh, p)?;
        let verts = mesh.vertex_patch(&seed, 2);
        let pts: Vec<[f64; 2]> = verts.iter().map(|&v| mesh.vertices[v]).collect();
        let vals: Vec<f64> = verts.iter().zip(&pts).map(|(&v, &x)| self.dofs[v] - s(x)).collect();
        Ok(fit_quadratic(p, &pts, &vals)?.grad)
    }

    pub fn scaled(&self, s: f64) -> Field3 {
        let mut f = self.clone();
        f.dofs.iter_mut().for_each(|d| *d *= s);
        f.multiplier *= s;
        f
    }
}

impl PointField for Field3 {
    fn jet(&self, p: [f64; 2]) -> Result<Jet> {
        let mesh = &self.mesh;
        let seed = recovery_seed(mesh, p)?;
        let verts = mesh.vertex_patch(&seed, 2);
        let pts: Vec<[f64; 2]> = verts.iter().map(|&v| mesh.vertices[v]).collect();
        let vals: Vec<f64> = verts.iter().map(|&v| self.dofs[v]).collect();
        let fit = fit_quadratic(p, &pts, &vals)?;
        let mut jet = Jet::default();
        jet.val[2] = if seed.len() == 1 { self.dofs[seed[0]] } else { self.value(p)? };
        jet.grad[2] = fit.grad;
        jet.hess[2] = fit.hess;
        Ok(jet)
    }
}
