//! Least-squares quadratic recovery of values, gradients and Hessians.

use crate::error::{Error, Result};
use crate::jet::Jet;
use nalgebra::{DMatrix, DVector};

/// Value, gradient and Hessian of a scalar at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScalarJet {
    pub val: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

/// Fits `c0 + c1 x + c2 y + c3 x^2 + c4 xy + c5 y^2` (centered at `center`) to the samples.
pub fn fit_quadratic(center: [f64; 2], points: &[[f64; 2]], values: &[f64]) -> Result<ScalarJet> {
    let n = points.len();
    if n < 6 {
        return Err(Error::Internal(format!("recovery patch has only {n} samples")));
    }
    let scale = points
        .iter()
        .map(|p| (p[0] - center[0]).hypot(p[1] - center[1]))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut a = DMatrix::zeros(n, 6);
    for (i, p) in points.iter().enumerate() {
        let (x, y) = ((p[0] - center[0]) / scale, (p[1] - center[1]) / scale);
        let row = [1.0, x, y, x * x, x * y, y * y];
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    let b = DVector::from_column_slice(values);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-10 * smax {
        return Err(Error::Internal("recovery patch is degenerate".into()));
    }
    let c = svd.solve(&b, 0.0).map_err(|e| Error::Internal(e.to_string()))?;
    let s2 = scale * scale;
    Ok(ScalarJet {
        val: c[0],
        grad: [c[1] / scale, c[2] / scale],
        hess: [[2.0 * c[3] / s2, c[4] / s2], [c[4] / s2, 2.0 * c[5] / s2]],
    })
}

/// Point evaluation shared by all discrete and composite plate fields.
pub trait PointField {
    /// Values and recovered derivatives (up to order 2) at `p`.
    fn jet(&self, p: [f64; 2]) -> Result<Jet>;
}

/// Value and gradient of every component at `p`.
pub fn evaluate_point(field: &dyn PointField, p: [f64; 2]) -> Result<([f64; 3], [[f64; 2]; 3])> {
    let j = field.jet(p)?;
    Ok((j.val, j.grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quadratics() {
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - y + 0.5 * x * x - 3.0 * x * y + 4.0 * y * y;
        let pts: Vec<[f64; 2]> = (0..12).map(|k| {
            let t = k as f64 * 0.7;
            [0.3 + 0.1 * t.cos() * (1.0 + 0.1 * k as f64), 0.2 + 0.1 * t.sin()]
        }).collect();
        let vals: Vec<f64> = pts.iter().map(|p| f(p[0], p[1])).collect();
        let j = fit_quadratic([0.3, 0.2], &pts, &vals).unwrap();
        assert!((j.val - f(0.3, 0.2)).abs() < 1e-12);
        assert!((j.grad[0] - (2.0 + 0.3 - 0.6)).abs() < 1e-11);
        assert!((j.grad[1] - (-1.0 - 0.9 + 1.6)).abs() < 1e-11);
        assert!((j.hess[0][1] + 3.0).abs() < 1e-9);
    }
}
