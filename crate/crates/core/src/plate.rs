//! Plate kinematics and constitutive maps in Mandel ordering.
//!
//! The membrane strain of `w' = (w1, w2)` is
//! `D'(grad) w' = (d1 w1, d2 w2, (d2 w1 + d1 w2)/sqrt2)` and the bending
//! strain of `w3` is `D3(grad) w3 = (d11 w3/sqrt2, d22 w3/sqrt2, d12 w3)`.
//! The membrane energy density is `(A0 e, e)` and the bending one
//! `(A0 k, k)/6`.

use nalgebra::{Matrix2, Matrix3, Vector3};
use std::f64::consts::SQRT_2;

/// Membrane strain column from `du[i][j] = d_j u_i`.
pub fn membrane_strain(du: &[[f64; 2]; 2]) -> Vector3<f64> {
    Vector3::new(du[0][0], du[1][1], (du[0][1] + du[1][0]) / SQRT_2)
}

/// Bending strain column from the Hessian of `w3`.
pub fn bending_strain(h: &[[f64; 2]; 2]) -> Vector3<f64> {
    Vector3::new(h[0][0] / SQRT_2, h[1][1] / SQRT_2, h[0][1])
}

/// Stress tensor `sigma_ij` of the membrane problem.
pub fn membrane_stress(a0: &Matrix3<f64>, du: &[[f64; 2]; 2]) -> Matrix2<f64> {
    let s = a0 * membrane_strain(du);
    let off = s[2] / SQRT_2;
    Matrix2::new(s[0], off, off, s[1])
}

/// Moment tensor `M_ij` with `L3 w = d_i d_j M_ij` and bending form `sum M_ij d_i d_j v`.
pub fn moment_tensor(a0: &Matrix3<f64>, h: &[[f64; 2]; 2]) -> Matrix2<f64> {
    let m = a0 * bending_strain(h) / 6.0;
    Matrix2::new(m[0] / SQRT_2, m[2] / 2.0, m[2] / 2.0, m[1] / SQRT_2)
}

/// Coefficients of the membrane symbol `L'(xi)`.
///
/// Entry `[i][j]` holds the coefficients of `(xi1^2, xi1 xi2, xi2^2)`.
pub fn membrane_symbol(a0: &Matrix3<f64>) -> [[[f64; 3]; 2]; 2] {
    // Columns of D'(xi) are linear in xi: D'(xi) = xi1 * P1 + xi2 * P2.
    let p1 = nalgebra::Matrix3x2::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0 / SQRT_2);
    let p2 = nalgebra::Matrix3x2::new(0.0, 0.0, 0.0, 1.0, 1.0 / SQRT_2, 0.0);
    let c11 = p1.transpose() * a0 * p1;
    let c22 = p2.transpose() * a0 * p2;
    let c12 = p1.transpose() * a0 * p2 + p2.transpose() * a0 * p1;
    let mut out = [[[0.0; 3]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = [c11[(i, j)], c12[(i, j)], c22[(i, j)]];
        }
    }
    out
}

/// Membrane symbol matrix at `xi`.
pub fn membrane_symbol_at(a0: &Matrix3<f64>, xi: [f64; 2]) -> Matrix2<f64> {
    let d = nalgebra::Matrix3x2::new(xi[0], 0.0, 0.0, xi[1], xi[1] / SQRT_2, xi[0] / SQRT_2);
    d.transpose() * a0 * d
}

/// Coefficients of the bending symbol `L3(xi)` on
/// `(xi1^4, xi1^3 xi2, xi1^2 xi2^2, xi1 xi2^3, xi2^4)`.
pub fn bending_symbol(a0: &Matrix3<f64>) -> [f64; 5] {
    // D3(xi) = (xi1^2/sqrt2, xi2^2/sqrt2, xi1 xi2).
    let a = a0 / 6.0;
    let (s11, s22, s33) = (a[(0, 0)] / 2.0, a[(1, 1)] / 2.0, a[(2, 2)]);
    let s12 = a[(0, 1)] / 2.0;
    let s13 = a[(0, 2)] / SQRT_2;
    let s23 = a[(1, 2)] / SQRT_2;
    [s11, 2.0 * s13, 2.0 * s12 + s33, 2.0 * s23, s22]
}

/// Bending symbol value at `xi`.
pub fn bending_symbol_at(a0: &Matrix3<f64>, xi: [f64; 2]) -> f64 {
    let d = Vector3::new(xi[0] * xi[0] / SQRT_2, xi[1] * xi[1] / SQRT_2, xi[0] * xi[1]);
    d.dot(&(a0 * d)) / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a0_sample() -> Matrix3<f64> {
        Matrix3::new(3.0, 0.4, 0.2, 0.4, 2.5, -0.3, 0.2, -0.3, 1.7)
    }

    #[test]
    fn symbol_coefficients_match_direct_evaluation() {
        let a0 = a0_sample();
        let c = membrane_symbol(&a0);
        let b = bending_symbol(&a0);
        for &xi in &[[0.3, -1.2], [1.0, 0.0], [0.7, 0.7]] {
            let m = membrane_symbol_at(&a0, xi);
            for i in 0..2 {
                for j in 0..2 {
                    let v = c[i][j][0] * xi[0] * xi[0] + c[i][j][1] * xi[0] * xi[1] + c[i][j][2] * xi[1] * xi[1];
                    assert!((v - m[(i, j)]).abs() < 1e-14);
                }
            }
            let mono = [
                xi[0].powi(4),
                xi[0].powi(3) * xi[1],
                xi[0].powi(2) * xi[1].powi(2),
                xi[0] * xi[1].powi(3),
                xi[1].powi(4),
            ];
            let v: f64 = b.iter().zip(mono).map(|(c, m)| c * m).sum();
            assert!((v - bending_symbol_at(&a0, xi)).abs() < 1e-14);
        }
    }

    #[test]
    fn moment_tensor_reproduces_bending_form() {
        let a0 = a0_sample();
        let hu = [[0.3, -0.2], [-0.2, 1.1]];
        let hv = [[-0.7, 0.5], [0.5, 0.4]];
        let m = moment_tensor(&a0, &hu);
        let lhs: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| m[(i, j)] * hv[i][j]).sum();
        let rhs = (a0 * bending_strain(&hu)).dot(&bending_strain(&hv)) / 6.0;
        assert!((lhs - rhs).abs() < 1e-15);
    }
}
