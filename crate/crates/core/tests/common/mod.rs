//! Dense reference implementations shared by the integration tests.
//!
//! Everything here trades speed for obviousness: full matrices, Jacobi
//! rotations, and Taylor series. The crate's solvers are checked against
//! these independent routes rather than against themselves.

#![allow(dead_code)]

use num_complex::Complex64;

use fasthit_core::linalg::SparseSymmetric;

/// Row-major dense real matrix.
#[derive(Debug, Clone)]
pub struct Dense {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn from_sparse(a: &SparseSymmetric) -> Self {
        let dim = a.dim();
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                data[i * dim + j] = v;
            }
        }
        Dense { dim, data }
    }

    pub fn from_tridiagonal(diag: &[f64], off: &[f64]) -> Self {
        let dim = diag.len();
        assert_eq!(off.len() + 1, dim);
        let mut data = vec![0.0; dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = d;
        }
        for (i, &w) in off.iter().enumerate() {
            data[i * dim + i + 1] = w;
            data[(i + 1) * dim + i] = w;
        }
        Dense { dim, data }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// The matrix scaled by a complex factor, as a row-major complex grid.
    pub fn scaled(&self, factor: Complex64) -> Vec<Complex64> {
        self.data.iter().map(|&x| factor * x).collect()
    }
}

/// Cyclic Jacobi diagonalization of a symmetric matrix.
///
/// Returns eigenvalues in ascending order and eigenvectors as a flat
/// column-major array, eigenvector `k` occupying `dim * k..dim * (k + 1)`.
pub fn jacobi_eigh(a: &Dense) -> (Vec<f64>, Vec<f64>) {
    let dim = a.dim;
    let mut m = a.data.clone();
    let mut vecs = vec![0.0; dim * dim];
    for i in 0..dim {
        vecs[i * dim + i] = 1.0;
    }

    let frobenius: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = 1e-14 * frobenius.max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                off += 2.0 * m[i * dim + j] * m[i * dim + j];
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = m[p * dim + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q * dim + q] - m[p * dim + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let mkp = m[k * dim + p];
                    let mkq = m[k * dim + q];
                    m[k * dim + p] = c * mkp - s * mkq;
                    m[k * dim + q] = s * mkp + c * mkq;
                }
                for k in 0..dim {
                    let mpk = m[p * dim + k];
                    let mqk = m[q * dim + k];
                    m[p * dim + k] = c * mpk - s * mqk;
                    m[q * dim + k] = s * mpk + c * mqk;
                }
                for k in 0..dim {
                    let vkp = vecs[k * dim + p];
                    let vkq = vecs[k * dim + q];
                    vecs[k * dim + p] = c * vkp - s * vkq;
                    vecs[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| m[i * dim + i].partial_cmp(&m[j * dim + j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * dim + i]).collect();
    let mut columns = vec![0.0; dim * dim];
    for (k, &src) in order.iter().enumerate() {
        for i in 0..dim {
            columns[k * dim + i] = vecs[i * dim + src];
        }
    }
    (eigenvalues, columns)
}

fn matmul(dim: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

/// Dense matrix exponential by scaling and squaring with a Taylor tail.
///
/// The argument is halved until its one-norm drops below one, the series
/// is summed to order 30 (remainder below 1e-33 at that norm), and the
/// result is squared back up.
pub fn dense_expm(dim: usize, m: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(m.len(), dim * dim);
    let one_norm = (0..dim)
        .map(|j| (0..dim).map(|i| m[i * dim + j].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let squarings = if one_norm > 1.0 { one_norm.log2().ceil() as u32 } else { 0 };
    let scale = 0.5f64.powi(squarings as i32);
    let b: Vec<Complex64> = m.iter().map(|z| z * scale).collect();

    let mut result = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut term = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        result[i * dim + i] = Complex64::new(1.0, 0.0);
        term[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    for k in 1..=30u32 {
        term = matmul(dim, &term, &b);
        let inv = Complex64::new(1.0 / k as f64, 0.0);
        for x in term.iter_mut() {
            *x *= inv;
        }
        for (r, t) in result.iter_mut().zip(&term) {
            *r += t;
        }
    }
    for _ in 0..squarings {
        result = matmul(dim, &result, &result);
    }
    result
}

/// Applies a row-major complex matrix to a vector.
pub fn apply(dim: usize, m: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for i in 0..dim {
        for j in 0..dim {
            out[i] += m[i * dim + j] * v[j];
        }
    }
    out
}

/// Largest entry-wise absolute difference between two complex vectors.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
