//! Fundamental solutions of the membrane operator `L'` and the bending operator `L3`.
//!
//! Both are built from the angular (plane-wave) representation: with
//! `f(theta)` the inverse symbol on the unit circle and `f_n` its Fourier
//! coefficients,
//!
//! ```text
//! Phi'(x)  =  Psi' ln r + (1/2pi) sum_n f_n K_n e^{in phi}
//! Phi3(x)  = -(r^2/4pi) sum_n f_n (C_n ln r + K2_n) e^{in phi}
//! ```
//!
//! where `K_n`, `C_n`, `K2_n` are the Fourier coefficients of `ln|cos t|`,
//! `cos^2 t` and `cos^2 t ln|cos t|`. The normalization is `L Phi = -delta`,
//! so the Neumann fluxes over circles are `+I2` and `+1` and the log
//! matrices are positive definite.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::plate;
use crate::poly::Poly2;
use crate::polar::{PolarSeries, PolarTerm};
use crate::tolerances;
use nalgebra::{Matrix2, Matrix3, Matrix4, SMatrix, Vector4};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::path::Path;

pub type Matrix3x4 = SMatrix<f64, 3, 4>;

/// Fourier coefficient of `ln|cos t|`.
fn k_hat(n: i32) -> f64 {
    if n == 0 {
        -std::f64::consts::LN_2
    } else if n % 2 != 0 {
        0.0
    } else {
        let k = n.abs() / 2;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        -sign / (2.0 * f64::from(k))
    }
}

fn c_hat(n: i32) -> f64 {
    match n.abs() {
        0 => 0.5,
        2 => 0.25,
        _ => 0.0,
    }
}

/// Fourier coefficient of `cos^2 t ln|cos t|`.
fn k2_hat(n: i32) -> f64 {
    0.5 * k_hat(n) + 0.25 * (k_hat(n - 2) + k_hat(n + 2))
}

/// Complex Fourier coefficients `f_n`, `n = 0, 2, ..., nmax`, of `n_entries`
/// real functions sampled at `N` uniform angles.
fn fourier(samples: &[Vec<f64>], nmax: i32) -> Vec<Vec<Complex64>> {
    let n_nodes = samples.len();
    let entries = samples[0].len();
    (0..=nmax / 2)
        .map(|k| {
            let n = 2 * k;
            let mut acc = vec![Complex64::new(0.0, 0.0); entries];
            for (j, s) in samples.iter().enumerate() {
                let theta = 2.0 * PI * j as f64 / n_nodes as f64;
                let e = Complex64::from_polar(1.0 / n_nodes as f64, -f64::from(n) * theta);
                for (a, v) in acc.iter_mut().zip(s) {
                    *a += e * v;
                }
            }
            acc
        })
        .collect()
}

struct AngularData {
    nodes: usize,
    psi_inplane: Matrix2<f64>,
    psi_bending: Matrix2<f64>,
    /// `f_n` for even `n >= 0`; entries `[f'00, f'01, f'11, f3]`.
    coeffs: Vec<Vec<Complex64>>,
}

fn sample_inverse_symbols(a0: &Matrix3<f64>, n: usize) -> Result<Vec<Vec<f64>>> {
    (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            let xi = [t.cos(), t.sin()];
            let m = plate::membrane_symbol_at(a0, xi);
            let inv = m
                .try_inverse()
                .ok_or_else(|| Error::Singular("membrane symbol not invertible".into()))?;
            let l3 = plate::bending_symbol_at(a0, xi);
            Ok(vec![inv[(0, 0)], inv[(0, 1)], inv[(1, 1)], 1.0 / l3])
        })
        .collect()
}

fn angular_data(a0: &Matrix3<f64>, n: usize) -> Result<AngularData> {
    let samples = sample_inverse_symbols(a0, n)?;
    let mut pi_ = Matrix2::zeros();
    let mut pb = Matrix2::zeros();
    for (j, s) in samples.iter().enumerate() {
        let t = 2.0 * PI * j as f64 / n as f64;
        pi_ += Matrix2::new(s[0], s[1], s[1], s[2]);
        let th = nalgebra::Vector2::new(t.cos(), t.sin());
        pb += th * th.transpose() * s[3];
    }
    let psi_inplane = pi_ / (2.0 * PI * n as f64);
    let psi_bending = pb * (2.0 * PI / n as f64) / (4.0 * PI * PI);
    let nmax = (n / 4) as i32;
    let coeffs = fourier(&samples, nmax);
    Ok(AngularData { nodes: n, psi_inplane, psi_bending, coeffs })
}

/// Truncates the coefficient list once all remaining magnitudes fall below
/// the relative threshold; `None` if the tail never gets small enough.
fn truncate(coeffs: &[Vec<Complex64>]) -> Option<usize> {
    // In-plane entries share one scale so that vanishing off-diagonal entries do not stall the test.
    let inplane = coeffs[0][..3].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let scale = [inplane, inplane, inplane, coeffs[0][3].norm()];
    let small = |k: usize| {
        coeffs[k]
            .iter()
            .zip(&scale)
            .all(|(c, s)| c.norm() <= tolerances::FOURIER_TRUNCATION * s)
    };
    match (0..coeffs.len()).rev().find(|&k| !small(k)) {
        Some(k) if k + 1 >= coeffs.len() => None,
        Some(k) => Some(k + 1),
        None => Some(1),
    }
}

/// Runs the angular quadrature with doubling until the log matrices and the
/// Fourier tail are resolved.
fn converged_angular_data(a0: &Matrix3<f64>) -> Result<AngularData> {
    let mut n = tolerances::ANGULAR_NODES;
    let mut prev = angular_data(a0, n)?;
    loop {
        let next_n = 2 * n;
        if next_n > tolerances::ANGULAR_NODES_MAX {
            return Err(Error::Refinement(format!(
                "log matrices not stable at {n} angular nodes; the reduced stiffness is too anisotropic"
            )));
        }
        let next = angular_data(a0, next_n)?;
        let scale = next.psi_inplane.norm().max(next.psi_bending.norm());
        let diff = (next.psi_inplane - prev.psi_inplane)
            .amax()
            .max((next.psi_bending - prev.psi_bending).amax());
        if diff <= tolerances::ANGULAR_REFINE * scale && truncate(&prev.coeffs).is_some() {
            let keep = truncate(&prev.coeffs).unwrap_or(prev.coeffs.len());
            prev.coeffs.truncate(keep);
            log::debug!("angular quadrature: {} nodes, {} Fourier modes", prev.nodes, 2 * keep - 1);
            return Ok(prev);
        }
        n = next_n;
        prev = next;
    }
}

/// Fundamental matrix of `L'` with its log matrix.
#[derive(Debug, Clone)]
pub struct InplaneFundamental {
    pub psi: Matrix2<f64>,
    /// Entries `(0,0)`, `(0,1)`, `(1,1)` of the symmetric matrix.
    series: [PolarSeries; 3],
    grads: [[PolarSeries; 2]; 3],
    hessians: [[PolarSeries; 3]; 3],
    pub nodes: usize,
}

/// Fundamental solution of `L3` with its log block.
#[derive(Debug, Clone)]
pub struct BendingFundamental {
    /// 2x2 log block: `Phi3 = -1/2 x^T Psi_b x ln r + O(r^2)`.
    pub psi_block: Matrix2<f64>,
    /// Scalar `Psi3 = tr(Psi_b) / 2`; the whole block for isotropic plates.
    pub psi3: f64,
    /// Derivatives `d1^a d2^b` for `a + b <= 4`, indexed by `deriv_index`.
    derivs: Vec<PolarSeries>,
    pub nodes: usize,
}

fn deriv_index(a: usize, b: usize) -> usize {
    let order = a + b;
    order * (order + 1) / 2 + b
}

fn entry_series(coeffs: &[Vec<Complex64>], entry: usize, f: impl Fn(i32, Complex64) -> Vec<PolarTerm>) -> PolarSeries {
    let mut terms = Vec::new();
    for (k, c) in coeffs.iter().enumerate() {
        let n = 2 * k as i32;
        let fnc = c[entry];
        terms.extend(f(n, fnc));
        if n > 0 {
            terms.extend(f(-n, fnc.conj()));
        }
    }
    PolarSeries::new(terms)
}

fn inplane_from(data: &AngularData) -> InplaneFundamental {
    let series: [PolarSeries; 3] = std::array::from_fn(|e| {
        let (i, j) = [(0, 0), (0, 1), (1, 1)][e];
        let log = PolarTerm { m: 0, p: 1, n: 0, c: Complex64::new(data.psi_inplane[(i, j)], 0.0) };
        entry_series(&data.coeffs, e, |n, c| vec![PolarTerm { m: 0, p: 0, n, c: c * (k_hat(n) / (2.0 * PI)) }])
            .add(&PolarSeries::new(vec![log]))
    });
    let grads = std::array::from_fn(|e| std::array::from_fn(|d| series[e].diff(d)));
    let hessians = std::array::from_fn(|e| {
        [series[e].derivative(2, 0), series[e].derivative(1, 1), series[e].derivative(0, 2)]
    });
    InplaneFundamental { psi: data.psi_inplane, series, grads, hessians, nodes: data.nodes }
}

fn bending_from(data: &AngularData) -> BendingFundamental {
    let base = entry_series(&data.coeffs, 3, |n, c| {
        let s = -1.0 / (4.0 * PI);
        let mut t = vec![PolarTerm { m: 2, p: 0, n, c: c * (s * k2_hat(n)) }];
        if c_hat(n) != 0.0 {
            t.push(PolarTerm { m: 2, p: 1, n, c: c * (s * c_hat(n)) });
        }
        t
    });
    let mut derivs = Vec::new();
    for order in 0..=4 {
        for b in 0..=order {
            derivs.push(base.derivative(order - b, b));
        }
    }
    let psi3 = data.psi_bending.trace() / 2.0;
    BendingFundamental { psi_block: data.psi_bending, psi3, derivs, nodes: data.nodes }
}

fn eval_at(series: &PolarSeries, x: [f64; 2]) -> f64 {
    if x[0] == 0.0 && x[1] == 0.0 {
        // Only terms with positive radial power appear in the values used at the origin.
        return series
            .terms()
            .iter()
            .map(|t| if t.m > 0 { 0.0 } else if t.m == 0 && t.p == 0 && t.n == 0 { t.c.re } else { f64::NAN })
            .sum();
    }
    series.eval(x)
}

impl InplaneFundamental {
    pub fn eval(&self, x: [f64; 2]) -> Matrix2<f64> {
        let v: [f64; 3] = std::array::from_fn(|e| self.series[e].eval(x));
        Matrix2::new(v[0], v[1], v[1], v[2])
    }

    /// `d_i Phi'`.
    pub fn grad(&self, x: [f64; 2]) -> [Matrix2<f64>; 2] {
        std::array::from_fn(|d| {
            let v: [f64; 3] = std::array::from_fn(|e| self.grads[e][d].eval(x));
            Matrix2::new(v[0], v[1], v[1], v[2])
        })
    }

    /// Second derivatives `d11, d12, d22` of `Phi'`.
    pub fn hessian(&self, x: [f64; 2]) -> [Matrix2<f64>; 3] {
        std::array::from_fn(|d| {
            let v: [f64; 3] = std::array::from_fn(|e| self.hessians[e][d].eval(x));
            Matrix2::new(v[0], v[1], v[1], v[2])
        })
    }

    /// Angular profile `psi'(phi) = Phi'(cos phi, sin phi)`.
    pub fn profile(&self, phi: f64) -> Matrix2<f64> {
        self.eval([phi.cos(), phi.sin()])
    }

    pub fn series_len(&self) -> usize {
        self.series.iter().map(PolarSeries::len).max().unwrap_or(0)
    }
}

impl BendingFundamental {
    /// Derivative `d1^a d2^b Phi3`, `a + b <= 4`; at the origin only orders `<= 1` are finite.
    pub fn derivative(&self, x: [f64; 2], a: usize, b: usize) -> f64 {
        assert!(a + b <= 4, "bending derivatives are available up to order 4");
        eval_at(&self.derivs[deriv_index(a, b)], x)
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.derivative(x, 0, 0)
    }

    pub fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        [self.derivative(x, 1, 0), self.derivative(x, 0, 1)]
    }

    pub fn hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let h12 = self.derivative(x, 1, 1);
        [[self.derivative(x, 2, 0), h12], [h12, self.derivative(x, 0, 2)]]
    }

    /// `d_k` of the Hessian.
    pub fn third(&self, x: [f64; 2], k: usize) -> [[f64; 2]; 2] {
        let (a, b) = if k == 0 { (1, 0) } else { (0, 1) };
        let d = |i: usize, j: usize| self.derivative(x, 2 - i - j + a, i + j + b);
        let h12 = d(0, 1);
        [[d(0, 0), h12], [h12, d(1, 1)]]
    }

    /// Angular profile `psi3(phi) = Phi3(cos phi, sin phi)`.
    pub fn profile(&self, phi: f64) -> f64 {
        self.eval([phi.cos(), phi.sin()])
    }
}

pub fn fundamental_inplane(a0: &Matrix3<f64>) -> Result<InplaneFundamental> {
    check_spd(a0)?;
    Ok(inplane_from(&converged_angular_data(a0)?))
}

pub fn fundamental_bending(a0: &Matrix3<f64>) -> Result<BendingFundamental> {
    check_spd(a0)?;
    Ok(bending_from(&converged_angular_data(a0)?))
}

fn check_spd(a0: &Matrix3<f64>) -> Result<()> {
    if (a0 - a0.transpose()).amax() > 1e-12 * a0.amax() || a0.symmetric_eigenvalues().min() <= 0.0 {
        return Err(Error::InvalidMaterial("reduced stiffness must be symmetric positive definite".into()));
    }
    Ok(())
}

/// `Psi = diag(Psi', Psi_b)`.
pub fn psi_matrix(psi_inplane: &Matrix2<f64>, psi_bending: &Matrix2<f64>) -> Result<Matrix4<f64>> {
    let det = psi_inplane.determinant();
    if det.abs() <= 1e-14 * psi_inplane.norm_squared() || !det.is_finite() {
        return Err(Error::Singular("in-plane log matrix is degenerate".into()));
    }
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(psi_inplane);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(psi_bending);
    Ok(m)
}

/// Rigid-motion matrix `d(eta, zeta)`; columns are translations and rotations
/// about the in-plane axes, ordered to pair with `(w1, w2, d1 w3, d2 w3)`.
pub fn rigid_matrix(eta: [f64; 2], zeta: f64) -> Matrix3x4 {
    Matrix3x4::new(
        1.0, 0.0, -zeta, 0.0, //
        0.0, 1.0, 0.0, -zeta, //
        0.0, 0.0, eta[0], eta[1],
    )
}

/// `d(grad, 0)^T w`, i.e. `(w1, w2, d1 w3, d2 w3)`.
pub fn rigid_trace(jet: &Jet) -> Vector4<f64> {
    Vector4::new(jet.val[0], jet.val[1], jet.grad[2][0], jet.grad[2][1])
}

/// Fundamental solutions, log matrices and the singular matrix `Phi#`.
///
/// An optional polynomial `gauge` is added to `Phi3`; it changes the regular
/// parts of Green functions but not the Green functions themselves.
#[derive(Debug, Clone)]
pub struct SingularBasis {
    pub a0: Matrix3<f64>,
    pub inplane: InplaneFundamental,
    pub bending: BendingFundamental,
    pub psi4: Matrix4<f64>,
    pub gauge: Poly2,
}

impl SingularBasis {
    pub fn new(a0: &Matrix3<f64>) -> Result<Self> {
        check_spd(a0)?;
        let data = converged_angular_data(a0)?;
        let inplane = inplane_from(&data);
        let bending = bending_from(&data);
        let psi4 = psi_matrix(&inplane.psi, &bending.psi_block)?;
        Ok(Self { a0: *a0, inplane, bending, psi4, gauge: Poly2::zero() })
    }

    /// Adds a polynomial of degree at most 2 to `Phi3`.
    pub fn with_gauge(mut self, gauge: Poly2) -> Result<Self> {
        if gauge.degree() > 2 {
            return Err(Error::InvalidInput("the bending gauge must be a polynomial of degree <= 2".into()));
        }
        self.gauge = gauge;
        Ok(self)
    }

    pub fn phi_inplane(&self, x: [f64; 2]) -> Matrix2<f64> {
        self.inplane.eval(x)
    }

    /// `d1^a d2^b Phi3` including the gauge.
    pub fn phi3(&self, x: [f64; 2], a: usize, b: usize) -> f64 {
        self.bending.derivative(x, a, b) + self.gauge.derivative(a as u32, b as u32).eval(x)
    }

    pub fn phi3_hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let h12 = self.phi3(x, 1, 1);
        [[self.phi3(x, 2, 0), h12], [h12, self.phi3(x, 0, 2)]]
    }

    /// `Phi# = [[Phi', 0], [0, -d1 Phi3, -d2 Phi3]]`, which behaves like `d(y, 0) Psi ln r`.
    pub fn phi_sharp(&self, x: [f64; 2]) -> Matrix3x4 {
        let p = self.phi_inplane(x);
        let mut m = Matrix3x4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&p);
        m[(2, 2)] = -self.phi3(x, 1, 0);
        m[(2, 3)] = -self.phi3(x, 0, 1);
        m
    }

    /// Jet of column `col` of `Phi#` at `x` (values, gradients, Hessians).
    pub fn phi_sharp_jet(&self, x: [f64; 2], col: usize) -> Jet {
        let mut jet = Jet::default();
        if col < 2 {
            let v = self.inplane.eval(x);
            let g = self.inplane.grad(x);
            let h = self.inplane.hessian(x);
            for c in 0..2 {
                jet.val[c] = v[(c, col)];
                for i in 0..2 {
                    jet.grad[c][i] = g[i][(c, col)];
                }
                jet.hess[c] = [[h[0][(c, col)], h[1][(c, col)]], [h[1][(c, col)], h[2][(c, col)]]];
            }
        } else {
            let (a, b) = if col == 2 { (1, 0) } else { (0, 1) };
            jet.val[2] = -self.phi3(x, a, b);
            jet.grad[2] = [-self.phi3(x, a + 1, b), -self.phi3(x, a, b + 1)];
            let h12 = -self.phi3(x, a + 1, b + 1);
            jet.hess[2] = [[-self.phi3(x, a + 2, b), h12], [h12, -self.phi3(x, a, b + 2)]];
        }
        jet
    }

    /// In-plane flux `oint sigma(Phi' e_k) n ds` over the circle of radius `r`.
    pub fn inplane_flux(&self, r: f64, nq: usize) -> Matrix2<f64> {
        let mut acc = Matrix2::zeros();
        for q in 0..nq {
            let t = 2.0 * PI * q as f64 / nq as f64;
            let n = [t.cos(), t.sin()];
            let x = [r * n[0], r * n[1]];
            let g = self.inplane.grad(x);
            for k in 0..2 {
                let du = [[g[0][(0, k)], g[1][(0, k)]], [g[0][(1, k)], g[1][(1, k)]]];
                let s = plate::membrane_stress(&self.a0, &du);
                for c in 0..2 {
                    acc[(c, k)] += s[(c, 0)] * n[0] + s[(c, 1)] * n[1];
                }
            }
        }
        acc * (2.0 * PI * r / nq as f64)
    }

    /// Bending flux `-oint n_i d_j M_ij(Phi3) ds` over the circle of radius `r`.
    pub fn bending_flux(&self, r: f64, nq: usize) -> f64 {
        let mut acc = 0.0;
        for q in 0..nq {
            let t = 2.0 * PI * q as f64 / nq as f64;
            let n = [t.cos(), t.sin()];
            let x = [r * n[0], r * n[1]];
            for j in 0..2 {
                let dm = plate::moment_tensor(&self.a0, &self.bending.third(x, j));
                acc -= n[0] * dm[(0, j)] + n[1] * dm[(1, j)];
            }
        }
        acc * (2.0 * PI * r / nq as f64)
    }

    /// Writes `(phi, psi'_11, psi'_12, psi'_22, psi3)` samples.
    pub fn write_profiles_csv(&self, path: &Path, samples: usize) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
        w.write_record(["phi", "psi_inplane_11", "psi_inplane_12", "psi_inplane_22", "psi_bending"])
            .map_err(|e| Error::Format(e.to_string()))?;
        for k in 0..samples {
            let phi = 2.0 * PI * k as f64 / samples as f64;
            let p = self.inplane.profile(phi);
            let b = self.bending.profile(phi);
            let row = [phi, p[(0, 0)], p[(0, 1)], p[(1, 1)], b].map(crate::report::fmt_f64);
            w.write_record(&row).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> FundamentalSummary {
        FundamentalSummary {
            psi_inplane: crate::report::rows(&self.inplane.psi),
            psi_bending_block: crate::report::rows(&self.bending.psi_block),
            psi_bending: self.bending.psi3,
            psi: crate::report::rows(&self.psi4),
            angular_nodes: self.inplane.nodes,
            normalization: "L Phi = -delta (fluxes +I2 and +1)".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FundamentalSummary {
    pub psi_inplane: Vec<Vec<f64>>,
    pub psi_bending_block: Vec<Vec<f64>>,
    pub psi_bending: f64,
    pub psi: Vec<Vec<f64>>,
    pub angular_nodes: usize,
    pub normalization: String,
}

/// Evaluates `L'` applied to column `k` of `Phi'` (for diagnostics away from the origin).
pub fn apply_membrane(a0: &Matrix3<f64>, hess: &[Matrix2<f64>; 3], k: usize) -> [f64; 2] {
    // L' u = -div sigma(u); sigma is linear in grad u, so take derivatives of the stress.
    let mut out = [0.0; 2];
    for (j, pair) in [[0usize, 1usize], [1, 2]].iter().enumerate() {
        // d_j (grad u): entries d_i d_j u_c.
        let du = [
            [hess[pair[0]][(0, k)], hess[pair[1]][(0, k)]],
            [hess[pair[0]][(1, k)], hess[pair[1]][(1, k)]],
        ];
        let s = plate::membrane_stress(a0, &du);
        for c in 0..2 {
            out[c] -= s[(c, j)];
        }
    }
    out
}

/// `L3 = d_i d_j M_ij` applied through fourth derivatives `d4[a]` = `d1^(4-a) d2^a`.
pub fn apply_bending(a0: &Matrix3<f64>, d4: &[f64; 5]) -> f64 {
    let sym = plate::bending_symbol(a0);
    sym.iter().zip(d4).map(|(c, d)| c * d).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{isotropic_a0, lambda_prime};

    fn kelvin(lambda: f64, mu: f64, x: [f64; 2]) -> Matrix2<f64> {
        let lp = lambda_prime(lambda, mu);
        let r2 = x[0] * x[0] + x[1] * x[1];
        let c = 1.0 / (4.0 * PI * mu * (lp + 2.0 * mu));
        let xx = nalgebra::Vector2::new(x[0], x[1]);
        (Matrix2::identity() * (-(lp + 3.0 * mu) * 0.5 * r2.ln()) + xx * xx.transpose() * ((lp + mu) / r2)) * c
    }

    fn anisotropic_a0() -> Matrix3<f64> {
        Matrix3::new(3.0, 0.7, 0.4, 0.7, 1.5, -0.3, 0.4, -0.3, 1.1)
    }

    #[test]
    fn fourier_coefficients_of_log_cos() {
        // Partial sums of the series reproduce ln|cos t| away from its zeros.
        let t: f64 = 0.4;
        let mut s = k_hat(0);
        for n in (2..20000).step_by(2) {
            s += 2.0 * k_hat(n) * (f64::from(n) * t).cos();
        }
        assert!((s - t.cos().abs().ln()).abs() < 1e-3);
        assert_eq!(k_hat(2), 0.5);
        assert_eq!(k_hat(4), -0.25);
    }

    #[test]
    fn isotropic_matches_kelvin() {
        let (l, m) = (1.0, 1.0);
        let b = SingularBasis::new(&isotropic_a0(l, m)).unwrap();
        assert!((b.inplane.psi - Matrix2::identity() * (11.0 / (32.0 * PI))).amax() < 1e-14);
        let xr = [1.0, 0.0];
        let reference = b.phi_inplane(xr) + kelvin(l, m, xr);
        for &r in &[0.1, 0.5, 1.3, 2.0] {
            for &t in &[0.0, 0.7, 2.1, 4.0] {
                let x = [r * f64::cos(t), r * f64::sin(t)];
                let diff = b.phi_inplane(x) + kelvin(l, m, x) - reference;
                assert!(diff.amax() < 1e-8, "r={r} t={t}: {diff}");
            }
        }
    }

    #[test]
    fn biharmonic_closed_form() {
        let b = SingularBasis::new(&Matrix3::identity()).unwrap();
        assert!((b.bending.psi3 - 3.0 / PI).abs() < 1e-12);
        let xr = [0.6, 0.0];
        let exact = |x: [f64; 2]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            -(3.0 / (2.0 * PI)) * 0.5 * r2 * r2.ln()
        };
        // The remainder is a multiple of r^2.
        let r2 = |x: [f64; 2]| x[0] * x[0] + x[1] * x[1];
        let alpha = (b.bending.eval(xr) - exact(xr)) / r2(xr);
        for &x in &[[0.0, 0.6], [-0.3, 0.52], [0.42, -1.424]] {
            assert!((b.bending.eval(x) - exact(x) - alpha * r2(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn fluxes_are_identity_for_anisotropic_plate() {
        let b = SingularBasis::new(&anisotropic_a0()).unwrap();
        for &r in &[0.5, 1.0, 2.0] {
            assert!((b.inplane_flux(r, 256) - Matrix2::identity()).amax() < 1e-10);
            assert!((b.bending_flux(r, 256) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn operators_annihilate_away_from_origin() {
        let a0 = anisotropic_a0();
        let b = SingularBasis::new(&a0).unwrap();
        let x = [0.7 * 0.6, 0.7 * 0.8];
        let h = b.inplane.hessian(x);
        let scale = b.inplane.psi.amax();
        for k in 0..2 {
            let r = apply_membrane(&a0, &h, k);
            assert!(r[0].abs().max(r[1].abs()) < 1e-10 * scale);
        }
        let d4: [f64; 5] = std::array::from_fn(|a| b.bending.derivative(x, 4 - a, a));
        assert!(apply_bending(&a0, &d4).abs() < 1e-10 * b.bending.psi3);
    }

    #[test]
    fn log_blocks_are_symmetric_and_scale_inversely() {
        let a0 = anisotropic_a0();
        let b1 = SingularBasis::new(&a0).unwrap();
        let b2 = SingularBasis::new(&(a0 * 2.5)).unwrap();
        assert!((b1.inplane.psi - b2.inplane.psi * 2.5).amax() < 1e-14);
        assert!((b1.bending.psi3 - b2.bending.psi3 * 2.5).abs() < 1e-14);
        assert!((b1.psi4 - b1.psi4.transpose()).amax() == 0.0);
        let det = b1.psi4.determinant();
        let expected = b1.inplane.psi.determinant() * b1.bending.psi_block.determinant();
        assert!((det - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn psi_matrix_layout() {
        let p = psi_matrix(&Matrix2::identity(), &(Matrix2::identity() * 2.0)).unwrap();
        assert_eq!(p, Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 2.0, 2.0)));
        assert!(psi_matrix(&Matrix2::zeros(), &Matrix2::identity()).is_err());
    }

    #[test]
    fn singular_matrix_structure_and_growth() {
        let b = SingularBasis::new(&anisotropic_a0()).unwrap();
        let m = b.phi_sharp([0.3, -0.2]);
        assert_eq!(m[(2, 0)], 0.0);
        assert_eq!(m[(2, 1)], 0.0);
        assert_eq!(m[(0, 2)], 0.0);
        assert_eq!(m[(1, 3)], 0.0);
        // Columns 3-4 are O(r |ln r|): normalized values stay bounded as r -> 0.
        let mut ratios = Vec::new();
        for k in 2..12 {
            let r = 0.5f64.powi(k);
            let v = b.phi_sharp([r * 0.6, r * 0.8]);
            ratios.push(v.fixed_view::<1, 2>(2, 2).amax() / (r * r.ln().abs()));
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(max < 2.0 * b.bending.psi_block.amax() + 1.0);
        assert!((ratios[9] - ratios[8]).abs() < 0.2 * ratios[9]);
    }

    #[test]
    fn rigid_columns_are_rigid_and_reproduced_by_ansatz() {
        use crate::material::{ansatz_operators, make_isotropic};
        let ops = ansatz_operators(&make_isotropic(1.3, 0.8).unwrap()).unwrap();
        let eta = [0.37, -0.81];
        for col in 0..4 {
            let mut jet = Jet::default();
            let d = rigid_matrix(eta, 0.0);
            for c in 0..3 {
                jet.val[c] = d[(c, col)];
            }
            // grad of the column: only row 3 depends on eta.
            if col >= 2 {
                jet.grad[2][col - 2] = 1.0;
            }
            for &zeta in &[-0.5, 0.1, 0.4] {
                let u = ops[0].apply(zeta, &jet) + ops[1].apply(zeta, &jet);
                let expected = rigid_matrix(eta, zeta).column(col).into_owned();
                assert!((u - expected).amax() < 1e-15);
                assert!(ops[2].apply(zeta, &jet).amax() == 0.0);
            }
            // Strain of the 3D column (u1, u2, u3)(eta, zeta) vanishes: e13 = (d_zeta u1 + d_1 u3)/2.
            let du1_dzeta = if col == 2 { -1.0 } else { 0.0 };
            let du3_d1 = if col == 2 { 1.0 } else { 0.0 };
            assert_eq!(du1_dzeta + du3_d1, 0.0);
        }
    }

    #[test]
    fn mollifier_reproduces_bump() {
        // int Phi3(x - y) L3 phi(y) dy = -phi(x) for phi = (1 - |y|^2)^5.
        let a0 = anisotropic_a0();
        let b = SingularBasis::new(&a0).unwrap();
        let one_minus = Poly2::from_terms(vec![(0, 0, 1.0), (2, 0, -1.0), (0, 2, -1.0)]);
        let mut phi = Poly2::constant(1.0);
        for _ in 0..5 {
            phi = poly_mul(&phi, &one_minus);
        }
        let sym = plate::bending_symbol(&a0);
        let mut l3phi = Poly2::zero();
        for (a, c) in sym.iter().enumerate() {
            l3phi = l3phi.add(&phi.derivative((4 - a) as u32, a as u32).scale(*c));
        }
        let x = [0.2, 0.1];
        let (gl_x, gl_w) = crate::quadrature::gauss_legendre(60);
        let nt = 256;
        let mut acc = 0.0;
        for k in 0..nt {
            let t = 2.0 * PI * (k as f64 + 0.5) / nt as f64;
            let e = [t.cos(), t.sin()];
            // Distance from x to the unit circle along e.
            let xe = x[0] * e[0] + x[1] * e[1];
            let rho = -xe + (xe * xe + 1.0 - x[0] * x[0] - x[1] * x[1]).sqrt();
            for (s, w) in gl_x.iter().zip(&gl_w) {
                let r = 0.5 * rho * (s + 1.0);
                let y = [x[0] + r * e[0], x[1] + r * e[1]];
                acc += w * 0.5 * rho * r * b.bending.eval([r * e[0], r * e[1]]) * l3phi.eval(y);
            }
        }
        acc *= 2.0 * PI / nt as f64;
        assert!((acc + phi.eval(x)).abs() < 1e-6, "{acc} vs {}", -phi.eval(x));
    }

    fn poly_mul(p: &Poly2, q: &Poly2) -> Poly2 {
        let mut t = Vec::new();
        for &(a, b, c) in p.terms() {
            for &(d, e, f) in q.terms() {
                t.push((a + d, b + e, c * f));
            }
        }
        Poly2::from_terms(t)
    }
}
