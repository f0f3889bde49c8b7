//! Three-mesh Richardson extrapolation with an error estimate.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolated {
    pub value: f64,
    /// Estimated error of `value`.
    pub error: f64,
    /// Observed convergence order, if it could be estimated.
    pub order: Option<f64>,
    /// Value on the finest mesh.
    pub finest: f64,
}

/// Extrapolates values on meshes with sizes `h, h/2, h/4` (coarse to fine).
///
/// When the observed order is not in `[0.5, 6]` the finest value is returned
/// with the last difference as its error bar.
pub fn extrapolate(v: [f64; 3]) -> Extrapolated {
    let d1 = v[0] - v[1];
    let d2 = v[1] - v[2];
    let fallback = Extrapolated { value: v[2], error: d2.abs(), order: None, finest: v[2] };
    if d2 == 0.0 {
        return Extrapolated { value: v[2], error: 0.0, order: None, finest: v[2] };
    }
    let ratio = d1 / d2;
    if !(ratio > 0.0) || !ratio.is_finite() {
        return fallback;
    }
    let p = ratio.log2();
    if !(0.5..=6.0).contains(&p) {
        return fallback;
    }
    let f = 2f64.powf(p);
    let correction = d2 / (f - 1.0);
    Extrapolated { value: v[2] - correction, error: correction.abs(), order: Some(p), finest: v[2] }
}

/// Entrywise extrapolation of matrices given as row-major slices.
pub fn extrapolate_all(levels: [&[f64]; 3]) -> Vec<Extrapolated> {
    (0..levels[0].len()).map(|i| extrapolate([levels[0][i], levels[1][i], levels[2][i]])).collect()
}
