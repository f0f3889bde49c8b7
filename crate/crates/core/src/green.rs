//! Green functions of the clamped plate at the support point and the matrix `G#`.
//!
//! Physical Green functions solve `L G = delta` with clamped edges. They are
//! split as `G = Phi_phys + G_hat` with `Phi_phys = -Phi`, and only the smooth
//! parts `G_hat` are computed by finite elements (zero load, Dirichlet data
//! from the traces of `Phi`). The model uses `G# = -[[G', 0], [0, G3^1, G3^2]]`
//! where `G3^i = G3,i - c_i G3` vanishes at the origin and `G3,i` is the
//! derivative of `G3` with respect to the source point. Near the origin
//! `G# = Phi# + d(y, 0) calG + O(r)` in the membrane rows and
//! `+ O(r^2 (1 + |ln r|))` in the bending row.

use crate::error::{Error, Result};
use crate::fem2d::inplane::bary_point;
use crate::fem2d::{Field2, Field3, PlateSystem, PointField};
use crate::fundsol::{rigid_matrix, Matrix3x4, SingularBasis};
use crate::jet::{Jet, TraceJet};
use crate::poly::Poly2;
use crate::quadrature::{duffy_rule, triangle_rule, TriPoint};
use crate::richardson::{extrapolate, Extrapolated};
use crate::{par, tolerances};
use nalgebra::{Matrix2, Matrix3, Matrix4, SVector};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// Green data on one mesh.
#[derive(Debug, Clone)]
pub struct GreenBundle {
    pub basis: Arc<SingularBasis>,
    /// Columns of the physical regular part of `G'`.
    pub ghat_inplane: [Field2; 2],
    /// Regular part of `G3(., O)`.
    pub ghat3: Field3,
    /// Regular parts of `G3,i`.
    pub ghat3_d: [Field3; 2],
    /// `G3(O, O)` from the regular part.
    pub g3_center: f64,
    /// `G3(O, O)` from the discrete energy `z^T K z` with `K z = e_O`.
    pub g3_center_energy: f64,
    /// `G3,i(O, O)`.
    pub g3_deriv_center: [f64; 2],
    /// `d_i G_hat3(O)`, the second route to `G3,i(O, O)`.
    pub g3_grad_center: [f64; 2],
    /// `c_i = G3,i(O, O) / G3(O, O)`.
    pub c: [f64; 2],
    pub cal_g: Matrix4<f64>,
    pub target_h: f64,
}

/// Physical Green columns and first derivatives of the bending entries at a point.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalGreen {
    /// `G'_phys(y, O)`.
    pub inplane: Matrix2<f64>,
    /// `G3^i(y)` for `i = 1, 2`.
    pub bending: [f64; 2],
    /// `d_k G3^i(y)` as `[i][k]`.
    pub bending_grad: [[f64; 2]; 2],
}

pub fn green_bundle(system: &PlateSystem, basis: &Arc<SingularBasis>) -> Result<GreenBundle> {
    if (system.inplane.a0() - basis.a0).amax() > 1e-12 * basis.a0.amax() {
        return Err(Error::InvalidInput("singular basis and discretization use different reduced stiffness".into()));
    }
    let b = basis.as_ref();
    let phi_col = |k: usize| move |y: [f64; 2]| {
        let p = b.phi_inplane(y);
        [p[(0, k)], p[(1, k)]]
    };
    let (c0, c1) = (phi_col(0), phi_col(1));
    let d3 = |y: [f64; 2]| (b.phi3(y, 0, 0), [b.phi3(y, 1, 0), b.phi3(y, 0, 1)]);
    let d31 = |y: [f64; 2]| (-b.phi3(y, 1, 0), [-b.phi3(y, 2, 0), -b.phi3(y, 1, 1)]);
    let d32 = |y: [f64; 2]| (-b.phi3(y, 0, 1), [-b.phi3(y, 1, 1), -b.phi3(y, 0, 2)]);
    use crate::fem2d::BendingLoad;
    let none = BendingLoad::none();
    let bend = &system.bending;
    let inpl = &system.inplane;
    let ((gi0, gi1), (g3, (g31, g32))) = par::join(
        || par::join(|| inpl.solve(None, Some(&c0)), || inpl.solve(None, Some(&c1))),
        || {
            par::join(
                || bend.solve(none, Some(&d3), false),
                || par::join(|| bend.solve(none, Some(&d31), false), || bend.solve(none, Some(&d32), false)),
            )
        },
    );
    let (gi0, gi1, g3, g31, g32) = (gi0?, gi1?, g3?, g31?, g32?);
    let mesh = &system.mesh;
    let o = mesh.origin();
    let ov = mesh.origin_vertex;

    let g3_center = -b.phi3(o, 0, 0) + g3.vertex_value(ov);
    if !(g3_center > 0.0) {
        return Err(Error::Internal(format!("G3(O, O) = {g3_center} is not positive")));
    }
    let g3_deriv_center = [b.phi3(o, 1, 0) + g31.vertex_value(ov), b.phi3(o, 0, 1) + g32.vertex_value(ov)];
    let j3 = g3.jet(o)?;
    let j31 = g31.jet(o)?;
    let j32 = g32.jet(o)?;
    // d_i G3(y, O) at y = O, which equals G3,i(O, O) by reciprocity.
    let g3_grad_center = [-b.phi3(o, 1, 0) + j3.grad[2][0], -b.phi3(o, 0, 1) + j3.grad[2][1]];
    let c = [g3_deriv_center[0] / g3_center, g3_deriv_center[1] / g3_center];

    let mut cal_g = Matrix4::zeros();
    for k in 0..2 {
        let f = if k == 0 { &gi0 } else { &gi1 };
        let v = f.values[ov];
        cal_g[(0, k)] = -v[0];
        cal_g[(1, k)] = -v[1];
    }
    // Smooth part of the bending row is R_i = -G_hat3,i + c_i G_hat3 with R_i(O) = 0.
    let jd = [j31, j32];
    for i in 0..2 {
        for j in 0..2 {
            cal_g[(2 + j, 2 + i)] = -jd[i].grad[2][j] + c[i] * j3.grad[2][j];
        }
    }

    let z = energy_green(system)?;
    let g3_center_energy = z;
    Ok(GreenBundle {
        basis: basis.clone(),
        ghat_inplane: [gi0, gi1],
        ghat3: g3,
        ghat3_d: [g31, g32],
        g3_center,
        g3_center_energy,
        g3_deriv_center,
        g3_grad_center,
        c,
        cal_g,
        target_h: mesh.target_h,
    })
}

/// `z_O = z^T K z` for the discrete Green function `K z = e_O`.
fn energy_green(system: &PlateSystem) -> Result<f64> {
    let bend = &system.bending;
    let n = bend.num_dofs();
    let mut f = vec![0.0; n];
    f[system.mesh.origin_vertex] = 1.0;
    let z = bend.solve_vectors(&f, &vec![0.0; n], false)?;
    Ok(2.0 * z.strain_energy)
}

impl GreenBundle {
    pub fn mesh(&self) -> &Arc<crate::fem2d::Mesh> {
        &self.ghat3.mesh
    }

    /// Relative asymmetry `|calG - calG^T| / |calG|`.
    pub fn asymmetry(&self) -> f64 {
        (self.cal_g - self.cal_g.transpose()).norm() / self.cal_g.norm().max(f64::MIN_POSITIVE)
    }

    /// Physical Green data at `y` inside triangle `t` (element evaluation, no recovery).
    pub fn physical_in_element(&self, t: usize, bary: &[f64; 3], y: [f64; 2]) -> PhysicalGreen {
        let b = &self.basis;
        let mut inplane = -b.phi_inplane(y);
        for k in 0..2 {
            let v = self.ghat_inplane[k].element_value(t, bary);
            inplane[(0, k)] += v[0];
            inplane[(1, k)] += v[1];
        }
        let g3 = -b.phi3(y, 0, 0) + self.ghat3.element_value(t, y);
        let g3g = self.ghat3.element_grad(t, y);
        let g3_grad = [-b.phi3(y, 1, 0) + g3g[0], -b.phi3(y, 0, 1) + g3g[1]];
        let mut bending = [0.0; 2];
        let mut bending_grad = [[0.0; 2]; 2];
        for i in 0..2 {
            let (a, c) = if i == 0 { (1, 0) } else { (0, 1) };
            let gi = b.phi3(y, a, c) + self.ghat3_d[i].element_value(t, y);
            let gg = self.ghat3_d[i].element_grad(t, y);
            let gi_grad = [b.phi3(y, a + 1, c) + gg[0], b.phi3(y, a, c + 1) + gg[1]];
            bending[i] = gi - self.c[i] * g3;
            for k in 0..2 {
                bending_grad[i][k] = gi_grad[k] - self.c[i] * g3_grad[k];
            }
        }
        PhysicalGreen { inplane, bending, bending_grad }
    }

    /// `G#(y)` by element evaluation of the regular parts.
    pub fn gsharp(&self, y: [f64; 2]) -> Result<Matrix3x4> {
        let (t, bary) = self.mesh().locate(y)?;
        let p = self.physical_in_element(t, &bary, y);
        let mut m = Matrix3x4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(-p.inplane));
        m[(2, 2)] = -p.bending[0];
        m[(2, 3)] = -p.bending[1];
        Ok(m)
    }

    /// Jet of column `col` of `G#` at `y != O`: analytic singular part plus recovered regular parts.
    pub fn gsharp_jet(&self, y: [f64; 2], col: usize) -> Result<Jet> {
        let b = &self.basis;
        let mut jet = b.phi_sharp_jet(y, col);
        if col < 2 {
            let r = self.ghat_inplane[col].jet(y)?;
            for comp in 0..2 {
                jet.val[comp] -= r.val[comp];
                for i in 0..2 {
                    jet.grad[comp][i] -= r.grad[comp][i];
                    for j in 0..2 {
                        jet.hess[comp][i][j] -= r.hess[comp][i][j];
                    }
                }
            }
        } else {
            let i = col - 2;
            let ci = self.c[i];
            let rd = self.ghat3_d[i].jet(y)?;
            let r3 = self.ghat3.jet(y)?;
            // -G3^i = -d_i Phi3 - G_hat3,i - c_i Phi3 + c_i G_hat3.
            let phi = [
                b.phi3(y, 0, 0),
                b.phi3(y, 1, 0),
                b.phi3(y, 0, 1),
                b.phi3(y, 2, 0),
                b.phi3(y, 1, 1),
                b.phi3(y, 0, 2),
            ];
            jet.val[2] += -rd.val[2] + ci * (r3.val[2] - phi[0]);
            jet.grad[2][0] += -rd.grad[2][0] + ci * (r3.grad[2][0] - phi[1]);
            jet.grad[2][1] += -rd.grad[2][1] + ci * (r3.grad[2][1] - phi[2]);
            let ph = [[phi[3], phi[4]], [phi[4], phi[5]]];
            for a in 0..2 {
                for c in 0..2 {
                    jet.hess[2][a][c] += -rd.hess[2][a][c] + ci * (r3.hess[2][a][c] - ph[a][c]);
                }
            }
        }
        Ok(jet)
    }

    /// `G#(y) - Phi#(y) - d(y, 0) calG`.
    pub fn remainder(&self, y: [f64; 2]) -> Result<Matrix3x4> {
        let o = self.mesh().origin();
        let rel = [y[0] - o[0], y[1] - o[1]];
        Ok(self.gsharp(y)? - self.basis.phi_sharp(rel) - rigid_matrix(rel, 0.0) * self.cal_g)
    }

    /// Integrates `f(t, bary, y)` over the mesh, with collapsed rules at the origin.
    pub fn integrate<const N: usize, F>(&self, f: F) -> SVector<f64, N>
    where
        F: Fn(usize, &[f64; 3], [f64; 2]) -> SVector<f64, N> + Sync,
    {
        let mesh = self.mesh();
        let regular = triangle_rule(5);
        let singular: Vec<Vec<TriPoint>> = (0..3).map(|k| duffy_rule(10, k)).collect();
        let ov = mesh.origin_vertex;
        let parts = par::map_range(mesh.num_triangles(), |t| {
            let tri = mesh.triangles[t];
            let rule = match tri.iter().position(|&v| v == ov) {
                Some(k) => &singular[k],
                None => &regular,
            };
            let p = mesh.corners(t);
            let area = mesh.area(t);
            let mut acc = SVector::<f64, N>::zeros();
            for q in rule {
                let y = bary_point(&p, &q.bary);
                acc += f(t, &q.bary, y) * (q.weight * area);
            }
            acc
        });
        parts.iter().fold(SVector::<f64, N>::zeros(), |a, b| a + b)
    }
}

/// Fitted decay exponents of the remainder near the origin.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub radii: Vec<f64>,
    /// Max-norm of rows 1-2 and of row 3 on each circle.
    pub membrane_rows: Vec<f64>,
    pub bending_row: Vec<f64>,
    pub membrane_rate: f64,
    pub membrane_rate_stderr: f64,
    /// Exponent of row 3 after dividing by `1 + |ln r|`.
    pub bending_rate: f64,
    pub bending_rate_stderr: f64,
    /// Set when the smallest radius is within a few mesh cells of the origin.
    pub resolution_warning: bool,
}

fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let stderr = if x.len() > 2 { (resid / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (slope, stderr)
}

/// Fits `log max|remainder|` against `log r` on circles around the origin.
pub fn decay_diagnostic(bundle: &GreenBundle, radii: &[f64]) -> Result<DecayReport> {
    if radii.len() < 4 {
        return Err(Error::InvalidInput("decay diagnostic needs at least 4 radii".into()));
    }
    let o = bundle.mesh().origin();
    let samples = 64;
    let mut mem = Vec::new();
    let mut ben = Vec::new();
    for &r in radii {
        let mut m: f64 = 0.0;
        let mut b: f64 = 0.0;
        for k in 0..samples {
            let t = 2.0 * PI * (k as f64 + 0.5) / samples as f64;
            let rem = bundle.remainder([o[0] + r * t.cos(), o[1] + r * t.sin()])?;
            m = m.max(rem.fixed_view::<2, 4>(0, 0).amax());
            b = b.max(rem.fixed_view::<1, 4>(2, 0).amax());
        }
        mem.push(m);
        ben.push(b);
    }
    let lr: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let (mr, ms) = fit_slope(&lr, &mem.iter().map(|v| v.ln()).collect::<Vec<_>>());
    let ben_log: Vec<f64> = ben.iter().zip(&lr).map(|(v, l)| (v / (1.0 + l.abs())).ln()).collect();
    let (br, bs) = fit_slope(&lr, &ben_log);
    let rmin = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    // Near the origin the mesh spacing is h/8.
    let resolution_warning = rmin < 4.0 * bundle.target_h / 8.0;
    if resolution_warning {
        log::warn!("decay diagnostic: smallest radius {rmin} is close to the mesh resolution");
    }
    Ok(DecayReport {
        radii: radii.to_vec(),
        membrane_rows: mem,
        bending_row: ben,
        membrane_rate: mr,
        membrane_rate_stderr: ms,
        bending_rate: br,
        bending_rate_stderr: bs,
        resolution_warning,
    })
}

/// Green data on a sequence of three meshes with Richardson extrapolation.
#[derive(Debug, Clone)]
pub struct GreenAnalysis {
    pub levels: Vec<GreenBundle>,
    pub cal_g: Matrix4<f64>,
    pub cal_g_error: Matrix4<f64>,
    pub g3_center: Extrapolated,
    pub g3_center_energy: Extrapolated,
    pub asymmetry: Vec<f64>,
    /// Set when the finest asymmetry exceeds the allowed multiple of the extrapolation error.
    pub flagged: bool,
}

impl GreenAnalysis {
    pub fn new(levels: Vec<GreenBundle>) -> Result<Self> {
        if levels.len() != 3 {
            return Err(Error::InvalidInput("Richardson extrapolation needs exactly three meshes".into()));
        }
        let mut cal_g = Matrix4::zeros();
        let mut cal_g_error = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let e = extrapolate([levels[0].cal_g[(i, j)], levels[1].cal_g[(i, j)], levels[2].cal_g[(i, j)]]);
                cal_g[(i, j)] = e.value;
                cal_g_error[(i, j)] = e.error;
            }
        }
        let g3_center = extrapolate([levels[0].g3_center, levels[1].g3_center, levels[2].g3_center]);
        let g3_center_energy =
            extrapolate([levels[0].g3_center_energy, levels[1].g3_center_energy, levels[2].g3_center_energy]);
        let asymmetry: Vec<f64> = levels.iter().map(GreenBundle::asymmetry).collect();
        let norm = levels[2].cal_g.norm().max(f64::MIN_POSITIVE);
        let tol = (cal_g_error.amax() / norm).max(1e-14);
        let flagged = asymmetry[2] > tolerances::GREEN_ASYMMETRY_FACTOR * tol && asymmetry[2] > 1e-3;
        if flagged {
            log::warn!("calG asymmetry {:.3e} exceeds the discretization tolerance {:.3e}", asymmetry[2], tol);
        }
        Ok(Self { levels, cal_g, cal_g_error, g3_center, g3_center_energy, asymmetry, flagged })
    }

    pub fn finest(&self) -> &GreenBundle {
        &self.levels[2]
    }

    /// Symmetric part of the extrapolated matrix, used by the model.
    pub fn cal_g_symmetric(&self) -> Matrix4<f64> {
        (self.cal_g + self.cal_g.transpose()) * 0.5
    }

    pub fn summary(&self) -> GreenSummary {
        GreenSummary {
            cal_g: crate::report::rows(&self.cal_g),
            cal_g_error: crate::report::rows(&self.cal_g_error),
            cal_g_levels: self.levels.iter().map(|l| crate::report::rows(&l.cal_g)).collect(),
            asymmetry: self.asymmetry.clone(),
            g3_center: self.g3_center,
            g3_center_energy: self.g3_center_energy,
            g3_deriv_center: self.finest().g3_deriv_center,
            g3_grad_center: self.finest().g3_grad_center,
            column_convention: "G# = -[[G', 0], [0, G3^1, G3^2]], G3^i = G3,i - c_i G3, paired with (w1, w2, d1 w3, d2 w3)"
                .into(),
            status: if self.flagged { "flagged" } else { "ok" }.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenSummary {
    pub cal_g: Vec<Vec<f64>>,
    pub cal_g_error: Vec<Vec<f64>>,
    pub cal_g_levels: Vec<Vec<Vec<f64>>>,
    pub asymmetry: Vec<f64>,
    pub g3_center: Extrapolated,
    pub g3_center_energy: Extrapolated,
    pub g3_deriv_center: [f64; 2],
    pub g3_grad_center: [f64; 2],
    pub column_convention: String,
    pub status: String,
}

/// Closed-form regular parts for an isotropic plate clamped on the unit disk
/// centred at the origin, with the default normalization of `Phi`.
#[derive(Debug, Clone)]
pub struct IsotropicDiskGreen {
    pub basis: Arc<SingularBasis>,
    /// `Phi'(n) = b n n^T + c I` on the unit circle.
    inplane_b: f64,
    inplane_c: f64,
    /// Coefficient of `|y|^2 e_k` in the membrane corrector.
    beta: f64,
    /// `Phi3 = -kappa r^2 ln r + alpha r^2`.
    kappa: f64,
    alpha: f64,
}

impl IsotropicDiskGreen {
    pub fn new(a0: &Matrix3<f64>) -> Result<Self> {
        let (p, q, s) = (a0[(0, 0)], a0[(0, 1)], a0[(2, 2)]);
        let iso = (a0[(1, 1)] - p).abs() + a0[(0, 2)].abs() + a0[(1, 2)].abs() + (s - (p - q)).abs();
        if iso > 1e-12 * p.abs() {
            return Err(Error::InvalidInput("the disk oracle needs an isotropic reduced stiffness".into()));
        }
        let basis = SingularBasis::new(a0)?;
        let (lp, mu) = (q, (p - q) / 2.0);
        let beta = -(2.0 * mu + 3.0 * (lp + mu)) / (4.0 * mu + 2.0 * (lp + mu));
        let e1 = basis.phi_inplane([1.0, 0.0]);
        let d = crate::plate::bending_symbol(a0)[0];
        let kappa = 1.0 / (8.0 * PI * d);
        let alpha = basis.phi3([1.0, 0.0], 0, 0);
        Ok(Self {
            basis: Arc::new(basis),
            inplane_b: e1[(0, 0)] - e1[(1, 1)],
            inplane_c: e1[(1, 1)],
            beta,
            kappa,
            alpha,
        })
    }

    pub fn cal_g(&self) -> Matrix4<f64> {
        let mut g = Matrix4::zeros();
        let gi = -(self.inplane_c - self.inplane_b * self.beta);
        g[(0, 0)] = gi;
        g[(1, 1)] = gi;
        g[(2, 2)] = 2.0 * self.alpha;
        g[(3, 3)] = 2.0 * self.alpha;
        g
    }

    /// `G3(O, O)`.
    pub fn g3_center(&self) -> f64 {
        self.kappa / 2.0
    }

    /// Physical regular part of `G'` column `k` and its gradient `[c][d] = d_d u_c`.
    fn inplane_regular(&self, y: [f64; 2], k: usize) -> ([f64; 2], [[f64; 2]; 2]) {
        let (b, c, beta) = (self.inplane_b, self.inplane_c, self.beta);
        let r2 = y[0] * y[0] + y[1] * y[1];
        let mut u = [0.0; 2];
        let mut du = [[0.0; 2]; 2];
        for i in 0..2 {
            let dik = if i == k { 1.0 } else { 0.0 };
            u[i] = b * (y[i] * y[k] + beta * (r2 - 1.0) * dik) + c * dik;
            for j in 0..2 {
                let dij = if i == j { 1.0 } else { 0.0 };
                let djk = if j == k { 1.0 } else { 0.0 };
                du[i][j] = b * (dij * y[k] + y[i] * djk + 2.0 * beta * y[j] * dik);
            }
        }
        (u, du)
    }

    /// Regular part of `G3,i`: `y_i (kappa |y|^2 - 2 alpha)`.
    fn bending_regular(&self, i: usize) -> Poly2 {
        let (a, b) = if i == 0 { (1, 0) } else { (0, 1) };
        Poly2::from_terms(vec![
            (a + 2, b, self.kappa),
            (a, b + 2, self.kappa),
            (a, b, -2.0 * self.alpha),
        ])
    }

    /// Column `col` of `G#` with the derivatives needed by the Neumann traces.
    pub fn column(&self, y: [f64; 2], col: usize) -> TraceJet {
        let mut t = TraceJet::default();
        let b = &self.basis;
        if col < 2 {
            let phi = b.phi_inplane(y);
            let g = b.inplane.grad(y);
            let (u, du) = self.inplane_regular(y, col);
            for i in 0..2 {
                t.u[i] = phi[(i, col)] - u[i];
                for j in 0..2 {
                    t.du[i][j] = g[j][(i, col)] - du[i][j];
                }
            }
        } else {
            // -G3^i = -d_i Phi3 - G_hat3,i.
            let (a, c) = if col == 2 { (1, 0) } else { (0, 1) };
            let reg = self.bending_regular(col - 2);
            let d = |p: usize, q: usize| -b.phi3(y, a + p, c + q) - reg.derivative(p as u32, q as u32).eval(y);
            t.w = d(0, 0);
            t.dw = [d(1, 0), d(0, 1)];
            t.d2w = [[d(2, 0), d(1, 1)], [d(1, 1), d(0, 2)]];
            t.d3w = [d(3, 0), d(2, 1), d(1, 2), d(0, 3)];
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem2d::Domain;
    use nalgebra::Matrix3;

    #[test]
    fn boggio_disk_center_value() {
        let a0 = Matrix3::identity();
        let basis = Arc::new(SingularBasis::new(&a0).unwrap());
        let sys = PlateSystem::build(&Domain::unit_disk(), 0.1, &a0).unwrap();
        let g = green_bundle(&sys, &basis).unwrap();
        let exact = 3.0 / (4.0 * PI);
        assert!((g.g3_center - exact).abs() < 0.01 * exact, "{}", g.g3_center);
        assert!((g.g3_center_energy - exact).abs() < 0.02 * exact, "{}", g.g3_center_energy);
        assert!(g.g3_deriv_center[0].abs() < 1e-3 && g.g3_deriv_center[1].abs() < 1e-3);
        // Boggio's regular part is cubic in the source derivative, so the block only
        // carries the r^2 normalization of Phi3: alpha = Phi3(e1).
        let alpha = basis.phi3([1.0, 0.0], 0, 0);
        let block = g.cal_g.fixed_view::<2, 2>(2, 2).into_owned();
        assert!((block - Matrix2::identity() * (2.0 * alpha)).amax() < 0.02 * 2.0 * alpha, "{block} {alpha}");
    }
}
