//! Continuous quadratic (P2) elements for the membrane problem.

use super::mesh::Mesh;
use super::recovery::{fit_quadratic, PointField};
use super::sparse::{Cholesky, Csr};
use crate::error::Result;
use crate::jet::Jet;
use crate::par;
use crate::plate;
use crate::quadrature::{triangle_rule, TriPoint};
use crate::tolerances;
use nalgebra::{Matrix3, SMatrix};
use std::sync::Arc;

pub type VecFn<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);

/// Gradients of the barycentric coordinates of triangle `t`.
pub(crate) fn bary_grads(p: &[[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    std::array::from_fn(|k| {
        let (b, c) = (p[(k + 1) % 3], p[(k + 2) % 3]);
        [(b[1] - c[1]) / det, (c[0] - b[0]) / det]
    })
}

/// P2 shape values on local nodes `[v0, v1, v2, m0, m1, m2]` (`m_k` opposite `v_k`).
pub(crate) fn p2_values(l: &[f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
        4.0 * l[0] * l[1],
    ]
}

pub(crate) fn p2_grads(l: &[f64; 3], g: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut out = [[0.0; 2]; 6];
    for k in 0..3 {
        for d in 0..2 {
            out[k][d] = (4.0 * l[k] - 1.0) * g[k][d];
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            out[3 + k][d] = 4.0 * (l[i] * g[j][d] + l[j] * g[i][d]);
        }
    }
    out
}

/// Global node numbers of triangle `t`: vertices, then `nv + edge`.
pub(crate) fn p2_nodes(mesh: &Mesh, t: usize) -> [usize; 6] {
    let v = mesh.triangles[t];
    let e = mesh.tri_edges[t];
    let nv = mesh.num_vertices();
    [v[0], v[1], v[2], nv + e[0], nv + e[1], nv + e[2]]
}

pub(crate) fn node_position(mesh: &Mesh, node: usize) -> [f64; 2] {
    let nv = mesh.num_vertices();
    if node < nv {
        mesh.vertices[node]
    } else {
        mesh.edge_midpoint(node - nv)
    }
}

fn element_matrix(mesh: &Mesh, a0: &Matrix3<f64>, t: usize, rule: &[TriPoint]) -> SMatrix<f64, 12, 12> {
    let p = mesh.corners(t);
    let g = bary_grads(&p);
    let area = mesh.area(t);
    let mut k = SMatrix::<f64, 12, 12>::zeros();
    for q in rule {
        let gr = p2_grads(&q.bary, &g);
        let strains: Vec<nalgebra::Vector3<f64>> = (0..12)
            .map(|i| {
                let (node, c) = (i / 2, i % 2);
                let mut du = [[0.0; 2]; 2];
                du[c] = gr[node];
                plate::membrane_strain(&du)
            })
            .collect();
        for i in 0..12 {
            let s = a0 * strains[i];
            for j in 0..12 {
                k[(i, j)] += q.weight * area * s.dot(&strains[j]);
            }
        }
    }
    k
}

/// Assembled and factorized membrane problem with clamped boundary.
#[derive(Debug)]
pub struct InplaneSystem {
    mesh: Arc<Mesh>,
    a0: Matrix3<f64>,
    stiffness: Csr,
    boundary_node: Vec<bool>,
    interior_index: Vec<Option<usize>>,
    chol: Cholesky,
}

/// Discrete membrane field: node values (vertices, then edge midpoints).
#[derive(Debug, Clone)]
pub struct Field2 {
    pub mesh: Arc<Mesh>,
    pub values: Vec<[f64; 2]>,
    /// `1/2 u^T K u - f^T u`.
    pub energy: f64,
    pub strain_energy: f64,
    pub load_work: f64,
}

impl InplaneSystem {
    pub fn new(mesh: Arc<Mesh>, a0: &Matrix3<f64>) -> Result<Self> {
        let nv = mesh.num_vertices();
        let nn = nv + mesh.num_edges();
        let rule = triangle_rule(2);
        let blocks = par::map_range(mesh.num_triangles(), |t| element_matrix(&mesh, a0, t, &rule));
        let mut trip = Vec::with_capacity(blocks.len() * 144);
        for (t, k) in blocks.iter().enumerate() {
            let nodes = p2_nodes(&mesh, t);
            for i in 0..12 {
                for j in 0..12 {
                    trip.push((2 * nodes[i / 2] + i % 2, 2 * nodes[j / 2] + j % 2, k[(i, j)]));
                }
            }
        }
        let stiffness = Csr::from_triplets(2 * nn, trip);
        let mut boundary_node = mesh.boundary_vertex.clone();
        boundary_node.extend(mesh.boundary_edge.iter().copied());
        let mut interior_index = vec![None; 2 * nn];
        let mut m = 0;
        for (node, &b) in boundary_node.iter().enumerate() {
            if !b {
                for c in 0..2 {
                    interior_index[2 * node + c] = Some(m);
                    m += 1;
                }
            }
        }
        let chol = Cholesky::new(stiffness.submatrix(&interior_index, m))?;
        Ok(Self { mesh, a0: *a0, stiffness, boundary_node, interior_index, chol })
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

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.boundary_node[node]
    }

    pub fn num_nodes(&self) -> usize {
        self.boundary_node.len()
    }

    /// Load vector of `(g, v)`.
    pub fn load_vector(&self, g: VecFn<'_>) -> Vec<f64> {
        let rule = triangle_rule(4);
        let mesh = &self.mesh;
        let locals = par::map_range(mesh.num_triangles(), |t| {
            let p = mesh.corners(t);
            let area = mesh.area(t);
            let mut f = [0.0; 12];
            for q in &rule {
                let x = bary_point(&p, &q.bary);
                let gv = g(x);
                let n = p2_values(&q.bary);
                for k in 0..6 {
                    for c in 0..2 {
                        f[2 * k + c] += q.weight * area * gv[c] * n[k];
                    }
                }
            }
            f
        });
        let mut out = vec![0.0; 2 * self.num_nodes()];
        for (t, f) in locals.iter().enumerate() {
            let nodes = p2_nodes(mesh, t);
            for i in 0..12 {
                out[2 * nodes[i / 2] + i % 2] += f[i];
            }
        }
        out
    }

    /// Solves with load `g` and Dirichlet data `dirichlet` on the boundary nodes.
    pub fn solve(&self, g: Option<VecFn<'_>>, dirichlet: Option<VecFn<'_>>) -> Result<Field2> {
        let n = 2 * self.num_nodes();
        let f = match g {
            Some(g) => self.load_vector(g),
            None => vec![0.0; n],
        };
        self.solve_vector(&f, dirichlet)
    }

    pub fn solve_vector(&self, f: &[f64], dirichlet: Option<VecFn<'_>>) -> Result<Field2> {
        let n = 2 * self.num_nodes();
        let mut u = vec![0.0; n];
        if let Some(d) = dirichlet {
            for (node, &b) in self.boundary_node.iter().enumerate() {
                if b {
                    let v = d(node_position(&self.mesh, node));
                    u[2 * node] = v[0];
                    u[2 * node + 1] = v[1];
                }
            }
        }
        let ku = self.stiffness.mul(&u);
        let m = self.chol.matrix().n;
        let mut rhs = vec![0.0; m];
        for i in 0..n {
            if let Some(ii) = self.interior_index[i] {
                rhs[ii] = f[i] - ku[i];
            }
        }
        let x = self.chol.solve(&rhs, tolerances::SPARSE_RESIDUAL)?;
        for i in 0..n {
            if let Some(ii) = self.interior_index[i] {
                u[i] = x[ii];
            }
        }
        let strain_energy = 0.5 * self.stiffness.bilinear(&u, &u);
        let load_work = super::sparse::dot(f, &u);
        let values = (0..self.num_nodes()).map(|k| [u[2 * k], u[2 * k + 1]]).collect();
        Ok(Field2 { mesh: self.mesh.clone(), values, energy: strain_energy - load_work, strain_energy, load_work })
    }
}

pub(crate) fn bary_point(p: &[[f64; 2]; 3], l: &[f64; 3]) -> [f64; 2] {
    [
        l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
        l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
    ]
}

impl Field2 {
    pub fn as_vector(&self) -> Vec<f64> {
        self.values.iter().flat_map(|v| [v[0], v[1]]).collect()
    }

    pub fn element_value(&self, t: usize, l: &[f64; 3]) -> [f64; 2] {
        let nodes = p2_nodes(&self.mesh, t);
        let n = p2_values(l);
        let mut out = [0.0; 2];
        for k in 0..6 {
            for c in 0..2 {
                out[c] += n[k] * self.values[nodes[k]][c];
            }
        }
        out
    }

    /// `grad[c][d] = d_d u_c` inside triangle `t`.
    pub fn element_grad(&self, t: usize, l: &[f64; 3]) -> [[f64; 2]; 2] {
        let nodes = p2_nodes(&self.mesh, t);
        let g = p2_grads(l, &bary_grads(&self.mesh.corners(t)));
        let mut out = [[0.0; 2]; 2];
        for k in 0..6 {
            for c in 0..2 {
                for d in 0..2 {
                    out[c][d] += g[k][d] * self.values[nodes[k]][c];
                }
            }
        }
        out
    }

    pub fn value(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let (t, l) = self.mesh.locate(p)?;
        Ok(self.element_value(t, &l))
    }

    /// `L2` and `H1`-seminorm errors against an exact solution.
    pub fn errors(&self, exact: VecFn<'_>, exact_grad: &(dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Sync)) -> (f64, f64) {
        let rule = triangle_rule(5);
        let parts = par::map_range(self.mesh.num_triangles(), |t| {
            let p = self.mesh.corners(t);
            let area = self.mesh.area(t);
            let (mut l2, mut h1) = (0.0, 0.0);
            for q in &rule {
                let x = bary_point(&p, &q.bary);
                let u = self.element_value(t, &q.bary);
                let e = exact(x);
                let du = self.element_grad(t, &q.bary);
                let de = exact_grad(x);
                l2 += q.weight * area * ((u[0] - e[0]).powi(2) + (u[1] - e[1]).powi(2));
                for c in 0..2 {
                    for d in 0..2 {
                        h1 += q.weight * area * (du[c][d] - de[c][d]).powi(2);
                    }
                }
            }
            (l2, h1)
        });
        let (l2, h1) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        (l2.sqrt(), h1.sqrt())
    }

    fn patch_samples(&self, p: [f64; 2]) -> Result<(Vec<[f64; 2]>, Vec<[f64; 2]>)> {
        let mesh = &self.mesh;
        let seed = recovery_seed(mesh, p)?;
        let verts = mesh.vertex_patch(&seed, 2);
        let in_patch: std::collections::BTreeSet<usize> = verts.iter().copied().collect();
        let mut pts = Vec::new();
        let mut vals = Vec::new();
        for &v in &verts {
            pts.push(mesh.vertices[v]);
            vals.push(self.values[v]);
        }
        let nv = mesh.num_vertices();
        for t in mesh.triangle_patch(&verts) {
            for k in 0..3 {
                let e = mesh.tri_edges[t][k];
                let [a, b] = mesh.edges[e];
                if in_patch.contains(&a) && in_patch.contains(&b) && !pts.contains(&mesh.edge_midpoint(e)) {
                    pts.push(mesh.edge_midpoint(e));
                    vals.push(self.values[nv + e]);
                }
            }
        }
        Ok((pts, vals))
    }
}

/// Recovery seed: the vertex at `p` if there is one, otherwise the containing triangle's vertices.
pub(crate) fn recovery_seed(mesh: &Mesh, p: [f64; 2]) -> Result<Vec<usize>> {
    let (t, l) = mesh.locate(p)?;
    let tol = 1e-10;
    for k in 0..3 {
        if l[k] > 1.0 - tol {
            return Ok(vec![mesh.triangles[t][k]]);
        }
    }
    Ok(mesh.triangles[t].to_vec())
}

impl PointField for Field2 {
    fn jet(&self, p: [f64; 2]) -> Result<Jet> {
        let (pts, vals) = self.patch_samples(p)?;
        let value = self.value(p)?;
        let mut jet = Jet::default();
        for c in 0..2 {
            let v: Vec<f64> = vals.iter().map(|x| x[c]).collect();
            let fit = fit_quadratic(p, &pts, &v)?;
            jet.val[c] = value[c];
            jet.grad[c] = fit.grad;
            jet.hess[c] = fit.hess;
        }
        Ok(jet)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem2d::mesh::{build_mesh, Domain};
    use crate::material::isotropic_a0;
    use std::f64::consts::PI;

    fn square() -> Domain {
        Domain::Polygon { vertices: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]] }
    }

    #[test]
    fn zero_data_gives_zero() {
        let mesh = Arc::new(build_mesh(&Domain::unit_disk(), 0.3).unwrap());
        let sys = InplaneSystem::new(mesh, &isotropic_a0(1.0, 1.0)).unwrap();
        let f = sys.solve(None, None).unwrap();
        assert!(f.values.iter().all(|v| v[0] == 0.0 && v[1] == 0.0));
        assert!(sys.stiffness().asymmetry() < 1e-13);
    }

    #[test]
    fn reproduces_quadratic_fields() {
        // Quadratic displacement with the matching load is reproduced exactly by P2.
        let a0 = Matrix3::new(3.0, 0.7, 0.4, 0.7, 1.5, -0.3, 0.4, -0.3, 1.1);
        let mesh = Arc::new(build_mesh(&square(), 0.4).unwrap());
        let sys = InplaneSystem::new(mesh.clone(), &a0).unwrap();
        let u = |x: [f64; 2]| [x[0] * x[0] - 0.3 * x[0] * x[1] + 0.1, 0.5 * x[1] * x[1] + x[0]];
        // Constant second derivatives: L'u = -div sigma(u), computed from the symbol coefficients.
        let sym = plate::membrane_symbol(&a0);
        // Hessian of u_c as coefficients of (d11, d12, d22).
        let hess = [[2.0, -0.3, 0.0], [0.0, 0.0, 1.0]];
        let mut load = [0.0; 2];
        for r in 0..2 {
            for c in 0..2 {
                for k in 0..3 {
                    load[r] -= sym[r][c][k] * hess[c][k];
                }
            }
        }
        let g = move |_: [f64; 2]| load;
        let field = sys.solve(Some(&g), Some(&u)).unwrap();
        for node in 0..sys.num_nodes() {
            let x = node_position(&mesh, node);
            let e = u(x);
            assert!((field.values[node][0] - e[0]).abs() < 1e-11);
            assert!((field.values[node][1] - e[1]).abs() < 1e-11);
        }
        let jet = field.jet([0.23, -0.41]).unwrap();
        assert!((jet.grad[0][0] - (2.0 * 0.23 + 0.3 * 0.41)).abs() < 1e-9);
        assert!((jet.grad[1][0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reciprocity() {
        let a0 = Matrix3::new(3.0, 0.7, 0.4, 0.7, 1.5, -0.3, 0.4, -0.3, 1.1);
        let mesh = Arc::new(build_mesh(&Domain::unit_disk(), 0.2).unwrap());
        let sys = InplaneSystem::new(mesh, &a0).unwrap();
        let ga = |x: [f64; 2]| [1.0 + x[1], -x[0] * x[0]];
        let gb = |x: [f64; 2]| [(PI * x[0]).sin(), 0.3];
        let u = sys.solve(Some(&ga), None).unwrap();
        let v = sys.solve(Some(&gb), None).unwrap();
        let fa = sys.load_vector(&ga);
        let fb = sys.load_vector(&gb);
        let lhs = super::super::sparse::dot(&fa, &v.as_vector());
        let rhs = super::super::sparse::dot(&fb, &u.as_vector());
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()));
    }
}
