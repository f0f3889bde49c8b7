//! Compressed sparse rows and a sparse Cholesky wrapper.

use crate::error::{Error, Result};
use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Builds an `n x n` matrix from triplets; duplicates are summed in a fixed order.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|x| (x.0, x.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `x^T A y` with compensated summation.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul(y);
        dot(x, &ay)
    }

    /// Largest `|A_ij - A_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }

    /// Restriction to the index set `keep` (indices into the new numbering).
    pub fn submatrix(&self, map: &[Option<usize>], m: usize) -> Csr {
        let mut t = Vec::new();
        for i in 0..self.n {
            if let Some(ii) = map[i] {
                for (j, v) in self.row(i) {
                    if let Some(jj) = map[j] {
                        t.push((ii, jj, v));
                    }
                }
            }
        }
        Csr::from_triplets(m, t)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }
}

/// Dot product with Neumaier summation.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for (a, b) in x.iter().zip(y) {
        let v = a * b;
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Sparse Cholesky factorization of a symmetric positive definite matrix.
pub struct Cholesky {
    matrix: Csr,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl std::fmt::Debug for Cholesky {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Cholesky").field("n", &self.matrix.n).field("nnz", &self.matrix.nnz()).finish()
    }
}

impl Cholesky {
    pub fn new(a: Csr) -> Result<Self> {
        let mut t = Vec::with_capacity(a.nnz());
        for i in 0..a.n {
            for (j, v) in a.row(i) {
                t.push(Triplet::new(i, j, v));
            }
        }
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(a.n, a.n, &t)
            .map_err(|e| Error::Solver(format!("sparse matrix construction failed: {e:?}")))?;
        let llt = m
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Solver(format!("Cholesky factorization failed (matrix not positive definite?): {e:?}")))?;
        Ok(Self { matrix: a, llt })
    }

    pub fn matrix(&self) -> &Csr {
        &self.matrix
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::<f64>::zeros(b.len(), 1);
        for (i, v) in b.iter().enumerate() {
            rhs[(i, 0)] = *v;
        }
        let x = self.llt.solve(&rhs);
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solves with two steps of iterative refinement; fails if the relative residual exceeds `tol`.
    pub fn solve(&self, b: &[f64], tol: f64) -> Result<Vec<f64>> {
        let mut x = self.raw_solve(b);
        for _ in 0..2 {
            let ax = self.matrix.mul(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let dx = self.raw_solve(&r);
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi += d;
            }
        }
        let ax = self.matrix.mul(&x);
        let res = norm(&b.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<_>>());
        let bn = norm(b);
        if !res.is_finite() || res > tol * bn.max(f64::MIN_POSITIVE) && bn > 0.0 {
            return Err(Error::Solver(format!("residual {res:e} exceeds {tol:e} relative to |b| = {bn:e}")));
        }
        Ok(x)
    }
}
