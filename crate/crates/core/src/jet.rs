//! Pointwise derivative data of a three-component plate field.

/// Values, gradients and Hessians of `(w1, w2, w3)` at a point.
///
/// `grad[c][i]` is `d_i w_c`; `hess[c][i][j]` is `d_i d_j w_c`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub val: [f64; 3],
    pub grad: [[f64; 2]; 3],
    pub hess: [[[f64; 2]; 2]; 3],
}

impl Jet {
    /// Derivative `d1^a d2^b` of component `c`, for `a + b <= 2`.
    pub fn derivative(&self, c: usize, a: u8, b: u8) -> f64 {
        match (a, b) {
            (0, 0) => self.val[c],
            (1, 0) => self.grad[c][0],
            (0, 1) => self.grad[c][1],
            (2, 0) => self.hess[c][0][0],
            (1, 1) => self.hess[c][0][1],
            (0, 2) => self.hess[c][1][1],
            _ => panic!("jet holds derivatives up to order 2, asked for ({a}, {b})"),
        }
    }

    pub fn scaled(&self, s: f64) -> Jet {
        let mut r = *self;
        for c in 0..3 {
            r.val[c] *= s;
            for i in 0..2 {
                r.grad[c][i] *= s;
                for j in 0..2 {
                    r.hess[c][i][j] *= s;
                }
            }
        }
        r
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut r = *self;
        for c in 0..3 {
            r.val[c] += o.val[c];
            for i in 0..2 {
                r.grad[c][i] += o.grad[c][i];
                for j in 0..2 {
                    r.hess[c][i][j] += o.hess[c][i][j];
                }
            }
        }
        r
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut r = *self;
        for c in 0..3 {
            r.val[c] *= s;
            for i in 0..2 {
                r.grad[c][i] *= s;
                for j in 0..2 {
                    r.hess[c][i][j] *= s;
                }
            }
        }
        r
    }
}

/// Derivatives entering the Neumann traces: first order for the membrane
/// components and third order for the deflection.
///
/// `d3w = [d111, d112, d122, d222]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceJet {
    pub u: [f64; 2],
    pub du: [[f64; 2]; 2],
    pub w: f64,
    pub dw: [f64; 2],
    pub d2w: [[f64; 2]; 2],
    pub d3w: [f64; 4],
}

impl TraceJet {
    pub fn axpy(&mut self, s: f64, o: &TraceJet) {
        for i in 0..2 {
            self.u[i] += s * o.u[i];
            self.dw[i] += s * o.dw[i];
            for j in 0..2 {
                self.du[i][j] += s * o.du[i][j];
                self.d2w[i][j] += s * o.d2w[i][j];
            }
        }
        self.w += s * o.w;
        for k in 0..4 {
            self.d3w[k] += s * o.d3w[k];
        }
    }

    /// `d_k d_i d_j w`.
    pub fn third(&self, k: usize, i: usize, j: usize) -> f64 {
        self.d3w[k + i + j]
    }
}
