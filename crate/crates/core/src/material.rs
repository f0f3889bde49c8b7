//! Mandel-ordered elasticity and the dimension reduction to the plate model.
//!
//! Strains are ordered `(e11, e22, sqrt2 e12, sqrt2 e13, sqrt2 e23, e33)`, so
//! engineering Voigt shear entries `gamma_ij = 2 e_ij` map to Mandel entries
//! `gamma_ij / sqrt2` and the stiffness matrix acts as a symmetric operator.
//! The first three entries form the in-plane `y` block, the last three the
//! transverse `z` block.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::poly::Poly2;
use nalgebra::{Matrix3, Matrix6, SMatrix, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

pub type Matrix3x6 = SMatrix<f64, 3, 6>;
pub type Matrix6x3 = SMatrix<f64, 6, 3>;

/// Symmetric positive definite 6x6 stiffness in Mandel ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessMatrix {
    m: Matrix6<f64>,
}

impl StiffnessMatrix {
    /// Validates symmetry and positive definiteness; the stored matrix is exactly symmetric.
    pub fn new(m: Matrix6<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMaterial("non-finite stiffness entry".into()));
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let asym = (m - m.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidMaterial(format!(
                "stiffness matrix not symmetric (max |A - A^T| = {asym:e})"
            )));
        }
        let m = (m + m.transpose()) * 0.5;
        let min_eig = m.symmetric_eigenvalues().min();
        if min_eig <= 0.0 {
            return Err(Error::InvalidMaterial(format!(
                "stiffness matrix not positive definite (smallest eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { m })
    }

    /// Builds the matrix from its 21 upper-triangle entries in row-major order.
    pub fn from_upper_triangle(entries: &[f64]) -> Result<Self> {
        if entries.len() != 21 {
            return Err(Error::InvalidMaterial(format!(
                "expected 21 upper-triangle entries, got {}",
                entries.len()
            )));
        }
        let mut m = Matrix6::zeros();
        let mut k = 0;
        for i in 0..6 {
            for j in i..6 {
                m[(i, j)] = entries[k];
                m[(j, i)] = entries[k];
                k += 1;
            }
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.m
    }

    pub fn yy(&self) -> Matrix3<f64> {
        self.m.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn yz(&self) -> Matrix3<f64> {
        self.m.fixed_view::<3, 3>(0, 3).into_owned()
    }

    pub fn zy(&self) -> Matrix3<f64> {
        self.yz().transpose()
    }

    pub fn zz(&self) -> Matrix3<f64> {
        self.m.fixed_view::<3, 3>(3, 3).into_owned()
    }

    fn zz_solve(&self, rhs: &Matrix3<f64>) -> Result<Matrix3<f64>> {
        let chol = self
            .zz()
            .cholesky()
            .ok_or_else(|| Error::Internal("A_zz block is singular although A is SPD".into()))?;
        Ok(chol.solve(rhs))
    }
}

/// Isotropic Mandel stiffness with Lame parameters `lambda`, `mu`.
pub fn make_isotropic(lambda: f64, mu: f64) -> Result<StiffnessMatrix> {
    if !(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0) {
        return Err(Error::InvalidMaterial(format!(
            "isotropic parameters need mu > 0 and 3 lambda + 2 mu > 0 (lambda = {lambda}, mu = {mu})"
        )));
    }
    let mut m = Matrix6::zeros();
    for &i in &[0usize, 1, 5] {
        for &j in &[0usize, 1, 5] {
            m[(i, j)] = lambda;
        }
        m[(i, i)] = lambda + 2.0 * mu;
    }
    for i in 2..5 {
        m[(i, i)] = 2.0 * mu;
    }
    StiffnessMatrix::new(m)
}

/// `lambda' = 2 lambda mu / (lambda + 2 mu)`.
pub fn lambda_prime(lambda: f64, mu: f64) -> f64 {
    2.0 * lambda * mu / (lambda + 2.0 * mu)
}

/// Closed-form reduced stiffness of an isotropic plate.
pub fn isotropic_a0(lambda: f64, mu: f64) -> Matrix3<f64> {
    let lp = lambda_prime(lambda, mu);
    Matrix3::new(lp + 2.0 * mu, lp, 0.0, lp, lp + 2.0 * mu, 0.0, 0.0, 0.0, 2.0 * mu)
}

/// Schur complement `A0 = A_yy - A_yz A_zz^-1 A_zy`.
pub fn reduce_stiffness(a: &StiffnessMatrix) -> Result<Matrix3<f64>> {
    let x = a.zz_solve(&a.zy())?;
    let a0 = a.yy() - a.yz() * x;
    Ok((a0 + a0.transpose()) * 0.5)
}

/// Transverse profile `X(zeta) = K (-zeta I3, sqrt2 (zeta^2/2 - 1/24) I3)`,
/// `K = J^-1 A_zz^-1 A_zy`, `J = diag(2^-1/2, 2^-1/2, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseProfile {
    k: Matrix3<f64>,
}

impl TransverseProfile {
    pub fn k(&self) -> &Matrix3<f64> {
        &self.k
    }

    fn assemble(&self, left: f64, right: f64) -> Matrix3x6 {
        let mut x = Matrix3x6::zeros();
        x.fixed_view_mut::<3, 3>(0, 0).copy_from(&(self.k * left));
        x.fixed_view_mut::<3, 3>(0, 3).copy_from(&(self.k * right));
        x
    }

    pub fn eval(&self, zeta: f64) -> Matrix3x6 {
        self.assemble(-zeta, SQRT_2 * (zeta * zeta / 2.0 - 1.0 / 24.0))
    }

    pub fn d_zeta(&self, zeta: f64) -> Matrix3x6 {
        self.assemble(-1.0, SQRT_2 * zeta)
    }

    pub fn d2_zeta(&self) -> Matrix3x6 {
        self.assemble(0.0, SQRT_2)
    }

    /// Largest residual of the transverse Neumann problem at `samples` and
    /// both faces, relative to `|A|`.
    ///
    /// Interior: `D3^T A (D3 X'' + Y') = 0`; faces: `D3^T A (D3 X' + Y) = 0`
    /// where `D3 = D(0, 0, 1)`.
    pub fn residual(&self, a: &StiffnessMatrix, samples: &[f64]) -> f64 {
        let d3 = strain_symbol([0.0, 0.0, 1.0]);
        let am = a.matrix();
        let scale = am.amax();
        let mut worst: f64 = 0.0;
        // The interior equation has zeta-independent terms, so every sample gives the same residual.
        if !samples.is_empty() {
            let r = d3.transpose() * am * (d3 * self.d2_zeta() + y_matrix_derivative());
            worst = worst.max(r.amax() / scale);
        }
        for &z in &[-0.5, 0.5] {
            let r = d3.transpose() * am * (d3 * self.d_zeta(z) + y_matrix(z));
            worst = worst.max(r.amax() / scale);
        }
        worst
    }
}

/// Builds the transverse profile of `A`.
pub fn transverse_profile(a: &StiffnessMatrix) -> Result<TransverseProfile> {
    let x = a.zz_solve(&a.zy())?;
    let jinv = Matrix3::from_diagonal(&Vector3::new(SQRT_2, SQRT_2, 1.0));
    Ok(TransverseProfile { k: jinv * x })
}

/// Strain symbol `D(xi)` (6x3) so that `e(u) = D(grad) u`.
pub fn strain_symbol(xi: [f64; 3]) -> Matrix6x3 {
    let s = 1.0 / SQRT_2;
    Matrix6x3::new(
        xi[0], 0.0, 0.0, //
        0.0, xi[1], 0.0, //
        s * xi[1], s * xi[0], 0.0, //
        s * xi[2], 0.0, s * xi[0], //
        0.0, s * xi[2], s * xi[1], //
        0.0, 0.0, xi[2],
    )
}

/// `Y(zeta) = [[I3, -sqrt2 zeta I3], [0, 0]]`.
pub fn y_matrix(zeta: f64) -> Matrix6<f64> {
    let mut y = Matrix6::zeros();
    for i in 0..3 {
        y[(i, i)] = 1.0;
        y[(i, i + 3)] = -SQRT_2 * zeta;
    }
    y
}

fn y_matrix_derivative() -> Matrix6<f64> {
    let mut y = Matrix6::zeros();
    for i in 0..3 {
        y[(i, i + 3)] = -SQRT_2;
    }
    y
}

/// Plate coefficient matrix `int Y^T A (D3 X' + Y) dzeta` by three-point Gauss quadrature.
pub fn plate_coefficients(a: &StiffnessMatrix) -> Result<Matrix6<f64>> {
    let profile = transverse_profile(a)?;
    Ok(plate_coefficients_from(a, &profile))
}

fn plate_coefficients_from(a: &StiffnessMatrix, profile: &TransverseProfile) -> Matrix6<f64> {
    let d3 = strain_symbol([0.0, 0.0, 1.0]);
    let g = (0.6f64).sqrt() / 2.0;
    let rule = [(-g, 5.0 / 18.0), (0.0, 8.0 / 18.0), (g, 5.0 / 18.0)];
    let mut acc = Matrix6::zeros();
    for &(z, w) in &rule {
        let y = y_matrix(z);
        acc += y.transpose() * a.matrix() * (d3 * profile.d_zeta(z) + y) * w;
    }
    acc
}

/// One term `poly(zeta) * d1^a d2^b w_col` contributing to output `row`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WTerm {
    pub row: usize,
    pub col: usize,
    /// Coefficients of `1, zeta, zeta^2`.
    pub zeta: [f64; 3],
    pub d: (u8, u8),
}

/// A 3x3 matrix of differential operators in `grad_y` with coefficients polynomial in `zeta`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WOperator {
    pub terms: Vec<WTerm>,
}

impl WOperator {
    pub fn apply(&self, zeta: f64, jet: &Jet) -> Vector3<f64> {
        let mut out = Vector3::zeros();
        for t in &self.terms {
            let p = t.zeta[0] + zeta * (t.zeta[1] + zeta * t.zeta[2]);
            out[t.row] += p * jet.derivative(t.col, t.d.0, t.d.1);
        }
        out
    }
}

/// The operators `W^0, W^1, W^2` of the displacement ansatz.
pub fn ansatz_operators(a: &StiffnessMatrix) -> Result<[WOperator; 3]> {
    let profile = transverse_profile(a)?;
    Ok(ansatz_operators_from(&profile))
}

fn ansatz_operators_from(profile: &TransverseProfile) -> [WOperator; 3] {
    let w0 = WOperator { terms: vec![WTerm { row: 2, col: 2, zeta: [1.0, 0.0, 0.0], d: (0, 0) }] };
    let mut w1 = WOperator::default();
    for i in 0..2 {
        w1.terms.push(WTerm { row: i, col: i, zeta: [1.0, 0.0, 0.0], d: (0, 0) });
        let d = if i == 0 { (1, 0) } else { (0, 1) };
        w1.terms.push(WTerm { row: i, col: 2, zeta: [0.0, -1.0, 0.0], d });
    }
    // Columns of the plate strain operator D(grad): entry k of D(grad) w as (col, derivative, factor).
    let s = 1.0 / SQRT_2;
    let dcols: [Vec<(usize, (u8, u8), f64)>; 6] = [
        vec![(0, (1, 0), 1.0)],
        vec![(1, (0, 1), 1.0)],
        vec![(0, (0, 1), s), (1, (1, 0), s)],
        vec![(2, (2, 0), s)],
        vec![(2, (0, 2), s)],
        vec![(2, (1, 1), 1.0)],
    ];
    let k = profile.k;
    let mut w2 = WOperator::default();
    for row in 0..3 {
        for (kk, entries) in dcols.iter().enumerate() {
            // X(zeta)[row][kk] as a polynomial in zeta.
            let poly = if kk < 3 {
                [0.0, -k[(row, kk)], 0.0]
            } else {
                let c = k[(row, kk - 3)];
                [-SQRT_2 * c / 24.0, 0.0, SQRT_2 * c / 2.0]
            };
            if poly.iter().all(|&c| c == 0.0) {
                continue;
            }
            for &(col, d, f) in entries {
                w2.terms.push(WTerm { row, col, zeta: [poly[0] * f, poly[1] * f, poly[2] * f], d });
            }
        }
    }
    [w0, w1, w2]
}

/// Everything produced by the dimension reduction.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub stiffness: StiffnessMatrix,
    pub a0: Matrix3<f64>,
    pub cal_a: Matrix6<f64>,
    pub profile: TransverseProfile,
    pub w_ops: [WOperator; 3],
}

impl ReducedModel {
    pub fn new(a: &StiffnessMatrix) -> Result<Self> {
        let a0 = reduce_stiffness(a)?;
        let profile = transverse_profile(a)?;
        let cal_a = plate_coefficients_from(a, &profile);
        let w_ops = ansatz_operators_from(&profile);
        let min_eig = a0.symmetric_eigenvalues().min();
        if min_eig <= 0.0 {
            return Err(Error::Internal(format!("reduced stiffness not positive definite ({min_eig:e})")));
        }
        Ok(Self { stiffness: a.clone(), a0, cal_a, profile, w_ops })
    }

    /// Relative deviation of the quadrature matrix from `blockdiag(A0, A0/6)`.
    pub fn block_deviation(&self) -> f64 {
        let mut expected = Matrix6::zeros();
        expected.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.a0);
        expected.fixed_view_mut::<3, 3>(3, 3).copy_from(&(self.a0 / 6.0));
        (self.cal_a - expected).norm() / self.cal_a.norm()
    }
}

/// One term `spatial(y) * zeta_poly(zeta)` of a component of `f^0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Term {
    /// Component index 0, 1 or 2.
    pub component: usize,
    pub spatial: Poly2,
    /// Coefficients of `1, zeta, ..., zeta^4`.
    pub zeta: Vec<f64>,
}

/// Volume force data of the three-dimensional plate.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LoadSpec {
    pub f0: Vec<F0Term>,
    /// Transverse component of `f^1`; the in-plane components vanish.
    pub f1_3: Poly2,
}

/// Plate load with the transverse part in weak form:
/// `(g, v) = (g1, v1) + (g2, v2) + (g3, v3) + sum_i (g3_grad[i], d_i v3)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReducedLoad {
    pub g: [Poly2; 3],
    pub g3_grad: [Poly2; 2],
}

impl ReducedLoad {
    pub fn direct(g1: Poly2, g2: Poly2, g3: Poly2) -> Self {
        Self { g: [g1, g2, g3], g3_grad: [Poly2::zero(), Poly2::zero()] }
    }

    pub fn is_zero(&self) -> bool {
        self.g.iter().all(Poly2::is_zero) && self.g3_grad.iter().all(Poly2::is_zero)
    }

    pub fn inplane(&self, y: [f64; 2]) -> [f64; 2] {
        [self.g[0].eval(y), self.g[1].eval(y)]
    }

    pub fn bending_value(&self, y: [f64; 2]) -> f64 {
        self.g[2].eval(y)
    }

    pub fn bending_grad(&self, y: [f64; 2]) -> [f64; 2] {
        [self.g3_grad[0].eval(y), self.g3_grad[1].eval(y)]
    }
}

/// `int_{-1/2}^{1/2} zeta^k dzeta`.
pub fn zeta_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        1.0 / ((1u64 << k) as f64 * (k as f64 + 1.0))
    }
}

fn poly_moment(coeffs: &[f64], shift: usize) -> f64 {
    coeffs.iter().enumerate().map(|(k, c)| c * zeta_moment(k + shift)).sum()
}

/// Reduces the volume force to the plate load.
///
/// `g_i` (i = 1, 2) is the zeta-average of `f0_i`; the transverse load is
/// `f1_3 + sum_i d_i int zeta f0_i`, returned weakly with
/// `g3_grad[i] = -int zeta f0_i dzeta`.
pub fn reduce_load(spec: &LoadSpec) -> Result<ReducedLoad> {
    let mut g = [Poly2::zero(), Poly2::zero(), spec.f1_3.clone()];
    let mut grad = [Poly2::zero(), Poly2::zero()];
    let mut f03_avg = Poly2::zero();
    for t in &spec.f0 {
        if t.component > 2 {
            return Err(Error::InvalidLoad(format!("f0 component index {} out of range", t.component)));
        }
        if t.zeta.len() > 5 {
            return Err(Error::InvalidLoad("zeta profiles are limited to degree 4".into()));
        }
        let m0 = poly_moment(&t.zeta, 0);
        let m1 = poly_moment(&t.zeta, 1);
        if t.component == 2 {
            f03_avg = f03_avg.add(&t.spatial.scale(m0));
        } else {
            let i = t.component;
            g[i] = g[i].add(&t.spatial.scale(m0));
            grad[i] = grad[i].add(&t.spatial.scale(-m1));
        }
    }
    let scale = spec
        .f0
        .iter()
        .map(|t| t.spatial.max_abs_coeff() * t.zeta.iter().fold(0.0f64, |m, c| m.max(c.abs())))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let moment = f03_avg.max_abs_coeff();
    if moment > 1e-14 * scale {
        return Err(Error::InvalidLoad(format!(
            "transverse component of f0 must have zero zeta-average; largest moment coefficient {moment}"
        )));
    }
    Ok(ReducedLoad { g, g3_grad: grad })
}
