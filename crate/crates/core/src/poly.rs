//! Polynomials in the in-plane coordinates `(y1, y2)`.

use serde::{Deserialize, Serialize};

/// A polynomial `sum c * y1^a * y2^b` with merged, sorted terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Poly2 {
    terms: Vec<(u32, u32, f64)>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![(0, 0, c)])
    }

    pub fn monomial(c: f64, a: u32, b: u32) -> Self {
        Self::from_terms(vec![(a, b, c)])
    }

    /// Builds a polynomial from `(a, b, coefficient)` triples, merging duplicates.
    pub fn from_terms(mut terms: Vec<(u32, u32, f64)>) -> Self {
        terms.sort_by_key(|t| (t.0, t.1));
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(terms.len());
        for (a, b, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == a && last.1 == b => last.2 += c,
                _ => merged.push((a, b, c)),
            }
        }
        merged.retain(|t| t.2 != 0.0);
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[(u32, u32, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.0 + t.1).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.2.abs()))
    }

    pub fn eval(&self, y: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|&(a, b, c)| c * y[0].powi(a as i32) * y[1].powi(b as i32))
            .sum()
    }

    /// Partial derivative `d1^i d2^j`.
    pub fn derivative(&self, i: u32, j: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.0 >= i && t.1 >= j)
            .map(|&(a, b, c)| {
                let fa: f64 = (a - i + 1..=a).map(|k| k as f64).product();
                let fb: f64 = (b - j + 1..=b).map(|k| k as f64).product();
                (a - i, b - j, c * fa * fb)
            })
            .collect();
        Self::from_terms(terms)
    }

    pub fn grad(&self, y: [f64; 2]) -> [f64; 2] {
        [self.derivative(1, 0).eval(y), self.derivative(0, 1).eval(y)]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|&(a, b, c)| (a, b, c * s)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(a, b, c) in &self.terms {
            for &(d, e, f) in &other.terms {
                t.push((a + d, b + e, c * f));
            }
        }
        Self::from_terms(t)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = self.terms.clone();
        t.extend_from_slice(&other.terms);
        Self::from_terms(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_and_differentiates() {
        let p = Poly2::from_terms(vec![(3, 0, 1.0), (0, 0, 2.0), (3, 0, 1.0), (1, 1, 0.5)]);
        assert_eq!(p.terms().len(), 3);
        assert_eq!(p.eval([0.3, 0.2]), 2.0 * 0.027 + 2.0 + 0.5 * 0.06);
        let q = Poly2::from_terms(vec![(1, 0, 1.0), (0, 1, -2.0)]);
        let y = [0.7, -0.4];
        assert!((p.mul(&q).eval(y) - p.eval(y) * q.eval(y)).abs() < 1e-14);
        let g = p.grad([0.3, 0.2]);
        assert!((g[0] - (6.0 * 0.09 + 0.5 * 0.2)).abs() < 1e-15);
        assert!((g[1] - 0.5 * 0.3).abs() < 1e-15);
        assert!(p.derivative(4, 0).is_zero());
        assert_eq!(p.degree(), 3);
    }
}
