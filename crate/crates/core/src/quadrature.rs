//! Gauss-Legendre and collapsed (Duffy) triangle rules.

use nalgebra::DMatrix;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]` (Golub-Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], 2.0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize to remove eigensolver noise.
    for k in 0..n / 2 {
        let x = 0.5 * (pairs[n - 1 - k].0 - pairs[k].0);
        let w = 0.5 * (pairs[n - 1 - k].1 + pairs[k].1);
        pairs[k] = (-x, w);
        pairs[n - 1 - k] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// Quadrature point on a triangle in barycentric coordinates with weight
/// normalized so that the weights sum to 1 (multiply by the area).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Collapsed tensor rule with `n x n` points; vertex `apex` is the collapsed
/// corner, so integrands with `1/r` or `ln r` singularities there are handled well.
pub fn duffy_rule(n: usize, apex: usize) -> Vec<TriPoint> {
    let (x, w) = gauss_legendre(n);
    let mut pts = Vec::with_capacity(n * n);
    for (xu, wu) in x.iter().zip(&w) {
        let u = 0.5 * (xu + 1.0);
        for (xv, wv) in x.iter().zip(&w) {
            let v = 0.5 * (xv + 1.0);
            // Point = apex + u * ((1 - v) e1 + v e2).
            let mut bary = [0.0; 3];
            bary[apex] = 1.0 - u;
            bary[(apex + 1) % 3] = u * (1.0 - v);
            bary[(apex + 2) % 3] = u * v;
            pts.push(TriPoint { bary, weight: 0.25 * wu * wv * 2.0 * u });
        }
    }
    pts
}

/// Rule exact for polynomials of total degree `2n - 2` on a triangle.
pub fn triangle_rule(n: usize) -> Vec<TriPoint> {
    duffy_rule(n, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact() {
        let (x, w) = gauss_legendre(5);
        for k in 0..10 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn triangle_rule_integrates_monomials() {
        // int over the reference triangle of l1^a l2^b = a! b! / (a + b + 2)! times 2 (area 1/2 normalized).
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let rule = triangle_rule(4);
        for a in 0..4u32 {
            for b in 0..(6 - a) {
                let q: f64 = rule.iter().map(|p| p.weight * p.bary[1].powi(a as i32) * p.bary[2].powi(b as i32)).sum();
                let exact = 2.0 * fact(a) * fact(b) / fact(a + b + 2);
                assert!((q - exact).abs() < 1e-14, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn duffy_handles_inverse_distance() {
        // int over the reference triangle of 1/|x| with apex at the origin = sqrt2 ln(1 + sqrt2).
        let rule = duffy_rule(24, 0);
        let q: f64 = rule
            .iter()
            .map(|p| {
                let (x, y) = (p.bary[1], p.bary[2]);
                0.5 * p.weight / x.hypot(y)
            })
            .sum();
        assert!((q - 2f64.sqrt() * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-10);
    }
}
