//! Real parts of finite sums `c r^m (ln r)^p e^{i n phi}` with exact derivatives.
//!
//! Derivatives use the Wirtinger rules
//! `d_z (r^m L^p e^{in phi}) = ((m+n)/2 L^p + p/2 L^{p-1}) r^{m-1} e^{i(n-1) phi}` and
//! `d_zbar (r^m L^p e^{in phi}) = ((m-n)/2 L^p + p/2 L^{p-1}) r^{m-1} e^{i(n+1) phi}`,
//! with `d_1 = d_z + d_zbar` and `d_2 = i (d_z - d_zbar)`.

use num_complex::Complex64;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarTerm {
    pub m: i32,
    pub p: u32,
    pub n: i32,
    pub c: Complex64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolarSeries {
    terms: Vec<PolarTerm>,
}

impl PolarSeries {
    pub fn new(terms: Vec<PolarTerm>) -> Self {
        let mut map: BTreeMap<(i32, u32, i32), Complex64> = BTreeMap::new();
        for t in terms {
            *map.entry((t.m, t.p, t.n)).or_default() += t.c;
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|((m, p, n), c)| PolarTerm { m, p, n, c })
            .collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[PolarTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let r = x[0].hypot(x[1]);
        let phi = x[1].atan2(x[0]);
        let l = r.ln();
        let e = Complex64::from_polar(1.0, phi);
        let mut acc = 0.0;
        for t in &self.terms {
            let radial = r.powi(t.m) * l.powi(t.p as i32);
            acc += (t.c * e.powi(t.n)).re * radial;
        }
        acc
    }

    fn d_z(&self, conj: bool) -> Vec<PolarTerm> {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            let (k, dn) = if conj { (f64::from(t.m - t.n) / 2.0, 1) } else { (f64::from(t.m + t.n) / 2.0, -1) };
            if k != 0.0 {
                out.push(PolarTerm { m: t.m - 1, p: t.p, n: t.n + dn, c: t.c * k });
            }
            if t.p > 0 {
                out.push(PolarTerm { m: t.m - 1, p: t.p - 1, n: t.n + dn, c: t.c * (f64::from(t.p) / 2.0) });
            }
        }
        out
    }

    /// `d_1` for `dir == 0`, `d_2` for `dir == 1`.
    pub fn diff(&self, dir: usize) -> Self {
        let dz = self.d_z(false);
        let dzb = self.d_z(true);
        let terms = if dir == 0 {
            dz.into_iter().chain(dzb).collect()
        } else {
            let i = Complex64::i();
            dz.into_iter()
                .map(|t| PolarTerm { c: t.c * i, ..t })
                .chain(dzb.into_iter().map(|t| PolarTerm { c: -t.c * i, ..t }))
                .collect()
        };
        Self::new(terms)
    }

    /// Derivative `d_1^a d_2^b`.
    pub fn derivative(&self, a: usize, b: usize) -> Self {
        let mut s = self.clone();
        for _ in 0..a {
            s = s.diff(0);
        }
        for _ in 0..b {
            s = s.diff(1);
        }
        s
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().chain(other.terms.iter()).copied().collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.terms.iter().map(|t| PolarTerm { c: t.c * s, ..*t }).collect())
    }
}
