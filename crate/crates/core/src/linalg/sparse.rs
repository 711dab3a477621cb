//! Sparse symmetric matrices in compressed sparse row form.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real symmetric sparse matrix.
///
/// Built from the upper triangle plus diagonal; off-diagonal entries are
/// mirrored so `matvec` never needs a transpose pass. Zero-valued entries
/// are dropped, and column indices within each row are ascending.
#[derive(Debug, Clone)]
pub struct SparseSymmetric {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetric {
    /// `entries` lists `(i, j, value)` with `i <= j`; the `i < j` entries are
    /// mirrored automatically. Repeating a coordinate is an error.
    pub fn from_symmetric_triplets(
        dim: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::parameter("matrix dimension must be >= 1"));
        }

        let mut expanded: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, value) in entries {
            if i >= dim || j >= dim {
                return Err(Error::parameter(format!(
                    "entry ({i}, {j}) out of range for dimension {dim}"
                )));
            }
            if i > j {
                return Err(Error::parameter(format!(
                    "entry ({i}, {j}) must satisfy i <= j; the lower triangle is implied"
                )));
            }
            if !value.is_finite() {
                return Err(Error::parameter(format!("entry ({i}, {j}) is not finite")));
            }
            if value == 0.0 {
                continue;
            }
            expanded.push((i, j, value));
            if i != j {
                expanded.push((j, i, value));
            }
        }

        expanded.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for pair in expanded.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::parameter(format!(
                    "duplicate entry at ({}, {})",
                    pair[0].0, pair[0].1
                )));
            }
        }

        let mut row_ptr = vec![0usize; dim + 1];
        for &(i, _, _) in &expanded {
            row_ptr[i + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = expanded.iter().map(|&(_, j, _)| j).collect();
        let values = expanded.iter().map(|&(_, _, v)| v).collect();

        Ok(SparseSymmetric { dim, row_ptr, col_idx, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &a) in cols.iter().zip(vals) {
                acc += a * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn matvec_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for i in 0..self.dim {
            let (cols, vals) = self.row(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (&j, &a) in cols.iter().zip(vals) {
                acc += v[j] * a;
            }
            out[i] = acc;
        }
        out
    }

    /// Infinity norm; used as a cheap spectral bound when sizing time steps.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum())
            .fold(0.0, f64::max)
    }
}
