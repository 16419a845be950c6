//! Small dense complex matrices used by the unitary step maps.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use super::mat::Mat;

/// Dense row-major complex matrix.
#[derive(Debug, Clone)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Complex64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// self · Q for a real Q.
    pub fn mul_real(&self, q: &Mat) -> CMat {
        assert_eq!(self.cols, q.rows());
        let mut out = CMat::zeros(self.rows, q.cols());
        let oc = q.cols();
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::ZERO {
                    continue;
                }
                let src = q.row(k);
                let dst = &mut out.data[i * oc..(i + 1) * oc];
                for j in 0..oc {
                    dst[j] += a * src[j];
                }
            }
        }
        out
    }

    /// self · Qᵀ for a real Q.
    pub fn mul_real_transpose(&self, q: &Mat) -> CMat {
        assert_eq!(self.cols, q.cols());
        let mut out = CMat::zeros(self.rows, q.rows());
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..q.rows() {
                let b = q.row(j);
                let mut acc = Complex64::ZERO;
                for k in 0..self.cols {
                    acc += a[k] * b[k];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Scale column j by factors[j].
    pub fn scale_cols(&mut self, factors: &[Complex64]) {
        assert_eq!(factors.len(), self.cols);
        for i in 0..self.rows {
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (v, f) in row.iter_mut().zip(factors) {
                *v *= f;
            }
        }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![Complex64::ZERO; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = Complex64::ZERO;
            for k in 0..self.cols {
                acc += row[k] * v[k];
            }
            out[i] = acc;
        }
        out
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// y = Qᵀ·x for real Q and complex x.
pub fn real_transpose_mul_cvec(q: &Mat, x: &[Complex64], y: &mut [Complex64]) {
    assert_eq!(q.rows(), x.len());
    assert_eq!(q.cols(), y.len());
    y.fill(Complex64::ZERO);
    for k in 0..q.rows() {
        let xk = x[k];
        let row = q.row(k);
        for j in 0..q.cols() {
            y[j] += row[j] * xk;
        }
    }
}

/// y = Q·x for real Q and complex x.
pub fn real_mul_cvec(q: &Mat, x: &[Complex64], y: &mut [Complex64]) {
    assert_eq!(q.cols(), x.len());
    assert_eq!(q.rows(), y.len());
    for i in 0..q.rows() {
        let row = q.row(i);
        let mut acc = Complex64::ZERO;
        for k in 0..row.len() {
            acc += row[k] * x[k];
        }
        y[i] = acc;
    }
}
