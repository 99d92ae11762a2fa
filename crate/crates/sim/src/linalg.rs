//! Dense least squares for the small ridge systems used by the predictors.

use crate::error::{Result, SimError};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Accumulates `XᵀWX` and `XᵀWY` for an affine model (a trailing bias column is implied).
#[derive(Clone, Debug)]
pub struct NormalEquations {
    dim: usize,
    outputs: usize,
    xtx: Vec<f64>,
    xty: Vec<f64>,
    count: usize,
}

impl NormalEquations {
    pub fn new(features: usize, outputs: usize) -> Self {
        let dim = features + 1;
        Self { dim, outputs, xtx: vec![0.0; dim * dim], xty: vec![0.0; dim * outputs], count: 0 }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn add(&mut self, x: &[f64], y: &[f64], weight: f64) {
        debug_assert_eq!(x.len() + 1, self.dim);
        debug_assert_eq!(y.len(), self.outputs);
        let d = self.dim;
        let xi = |i: usize| if i + 1 == d { 1.0 } else { x[i] };
        for i in 0..d {
            let wi = weight * xi(i);
            if wi == 0.0 {
                continue;
            }
            let row = &mut self.xtx[i * d..];
            for j in 0..=i {
                row[j] += wi * xi(j);
            }
            let out = &mut self.xty[i * self.outputs..(i + 1) * self.outputs];
            for (o, &yk) in out.iter_mut().zip(y) {
                *o += wi * yk;
            }
        }
        self.count += 1;
    }

    /// Adds another accumulator over the same shape (pooling two datasets).
    pub fn merge(&mut self, other: &NormalEquations) {
        assert_eq!((self.dim, self.outputs), (other.dim, other.outputs), "shape mismatch");
        for (a, b) in self.xtx.iter_mut().zip(&other.xtx) {
            *a += b;
        }
        for (a, b) in self.xty.iter_mut().zip(&other.xty) {
            *a += b;
        }
        self.count += other.count;
    }

    /// Solves `(XᵀWX + λI) B = XᵀWY` by Cholesky; `B` is `(features+1) × outputs`.
    pub fn solve(&self, lambda: f64) -> Result<Matrix> {
        let d = self.dim;
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let v = self.xtx[i * d + j];
                a[i * d + j] = v;
                a[j * d + i] = v;
            }
            a[i * d + i] += lambda;
        }
        let scale = (0..d).map(|i| a[i * d + i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        // in-place lower Cholesky factor
        for j in 0..d {
            let mut diag = a[j * d + j];
            for k in 0..j {
                diag -= a[j * d + k] * a[j * d + k];
            }
            if !(diag > scale * 1e-14) {
                return Err(SimError::SingularSystem);
            }
            let diag = diag.sqrt();
            a[j * d + j] = diag;
            for i in j + 1..d {
                let mut s = a[i * d + j];
                for k in 0..j {
                    s -= a[i * d + k] * a[j * d + k];
                }
                a[i * d + j] = s / diag;
            }
        }
        let mut b = Matrix { rows: d, cols: self.outputs, data: self.xty.clone() };
        for col in 0..self.outputs {
            for i in 0..d {
                let mut s = b.data[i * self.outputs + col];
                for k in 0..i {
                    s -= a[i * d + k] * b.data[k * self.outputs + col];
                }
                b.data[i * self.outputs + col] = s / a[i * d + i];
            }
            for i in (0..d).rev() {
                let mut s = b.data[i * self.outputs + col];
                for k in i + 1..d {
                    s -= a[k * d + i] * b.data[k * self.outputs + col];
                }
                b.data[i * self.outputs + col] = s / a[i * d + i];
            }
        }
        Ok(b)
    }
}
