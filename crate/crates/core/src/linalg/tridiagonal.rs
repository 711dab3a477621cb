//! Symmetric tridiagonal matrices, their eigendecomposition, and exact
//! propagators built from the eigenbasis.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored as its diagonal and subdiagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

impl SymTridiagonal {
    /// `off_diagonal[i]` couples sites `i` and `i + 1`, so it must be one
    /// entry shorter than `diagonal`. All entries must be finite.
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::parameter("tridiagonal matrix must have dimension >= 1"));
        }
        if off_diagonal.len() + 1 != diagonal.len() {
            return Err(Error::parameter(format!(
                "off-diagonal length {} does not match dimension {}",
                off_diagonal.len(),
                diagonal.len()
            )));
        }
        if !diagonal.iter().chain(off_diagonal.iter()).all(|x| x.is_finite()) {
            return Err(Error::parameter("tridiagonal entries must be finite"));
        }
        Ok(SymTridiagonal { diagonal, off_diagonal })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim());
        let m = self.dim();
        let mut out = vec![0.0; m];
        for i in 0..m {
            let mut acc = self.diagonal[i] * v[i];
            if i > 0 {
                acc += self.off_diagonal[i - 1] * v[i - 1];
            }
            if i + 1 < m {
                acc += self.off_diagonal[i] * v[i + 1];
            }
            out[i] = acc;
        }
        out
    }

    /// Infinity norm; cheap spectral-radius bound for step-size heuristics.
    pub fn max_abs_row_sum(&self) -> f64 {
        let m = self.dim();
        (0..m)
            .map(|i| {
                let mut s = self.diagonal[i].abs();
                if i > 0 {
                    s += self.off_diagonal[i - 1].abs();
                }
                if i + 1 < m {
                    s += self.off_diagonal[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }
}

/// Full eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues are ascending; `vectors` holds the orthonormal eigenvectors
/// column-major, so column `k` spans `vectors[k * dim..(k + 1) * dim]`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    dim: usize,
    eigenvalues: Vec<f64>,
    vectors: Vec<f64>,
}

impl EigenSystem {
    /// Wraps an externally computed decomposition, e.g. from a dense
    /// eigensolver. Eigenvalues must be ascending and finite; `vectors` is
    /// column-major and must be orthonormal to within `1e-10` per entry.
    pub fn from_parts(eigenvalues: Vec<f64>, vectors: Vec<f64>) -> Result<Self> {
        let dim = eigenvalues.len();
        if dim == 0 || vectors.len() != dim * dim {
            return Err(Error::parameter(format!(
                "vector storage length {} does not match {dim} eigenvalues",
                vectors.len()
            )));
        }
        if !eigenvalues.iter().chain(vectors.iter()).all(|x| x.is_finite()) {
            return Err(Error::parameter("eigendecomposition entries must be finite"));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::parameter("eigenvalues must be ascending"));
        }
        let sys = EigenSystem { dim, eigenvalues, vectors };
        for a in 0..dim {
            for b in a..dim {
                let dot: f64 =
                    sys.eigenvector(a).iter().zip(sys.eigenvector(b)).map(|(x, y)| x * y).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                if (dot - expect).abs() > 1e-10 {
                    return Err(Error::parameter(format!(
                        "eigenvector columns {a} and {b} are not orthonormal"
                    )));
                }
            }
        }
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }
}

/// Which exponential family a propagator applies.
///
/// `Unitary` propagates `exp(-i H t)` (quantum evolution); `Semigroup`
/// propagates `exp(M t)` for a generator with nonpositive spectrum
/// (classical rate dynamics).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    Unitary,
    Semigroup,
}

/// Diagonalizes a symmetric tridiagonal matrix with implicitly shifted QL
/// iterations (Wilkinson shifts), accumulating the eigenvectors.
///
/// Fails with a numerical error if convergence needs more than `30 * dim`
/// sweeps, which for well-posed input does not happen in practice.
pub fn eigh_tridiagonal(h: &SymTridiagonal) -> Result<EigenSystem> {
    let m = h.dim();
    let mut d = h.diagonal.clone();
    let mut e = h.off_diagonal.clone();
    e.push(0.0);

    // Column-major identity; rotations act on pairs of columns.
    let mut z = vec![0.0; m * m];
    for i in 0..m {
        z[i * m + i] = 1.0;
    }

    let budget = 30 * m;
    let mut sweeps = 0usize;

    for l in 0..m {
        loop {
            // Locate the first negligible subdiagonal entry at or after l.
            let mut seg = l;
            while seg + 1 < m {
                let scale = d[seg].abs() + d[seg + 1].abs();
                if e[seg].abs() <= f64::EPSILON * scale {
                    break;
                }
                seg += 1;
            }
            if seg == l {
                break;
            }

            sweeps += 1;
            if sweeps > budget {
                return Err(Error::numerical(format!(
                    "tridiagonal eigensolver did not converge within {budget} sweeps"
                )));
            }

            // Wilkinson shift from the leading 2x2 block of the segment.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[seg] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflowed = false;

            for i in (l..seg).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Rotation chain collapsed; drop the shift and retry.
                    d[i + 1] -= p;
                    e[seg] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                let (lo, hi) = z.split_at_mut((i + 1) * m);
                let col_i = &mut lo[i * m..(i + 1) * m];
                let col_j = &mut hi[..m];
                for k in 0..m {
                    f = col_j[k];
                    col_j[k] = s * col_i[k] + c * f;
                    col_i[k] = c * col_i[k] - s * f;
                }
            }

            if underflowed {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[seg] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut vectors = vec![0.0; m * m];
    for (dst, &src) in order.iter().enumerate() {
        vectors[dst * m..(dst + 1) * m].copy_from_slice(&z[src * m..(src + 1) * m]);
    }

    Ok(EigenSystem { dim: m, eigenvalues, vectors })
}

/// Applies `exp(-i H t)` or `exp(H t)` to a vector through the eigenbasis.
///
/// Exact up to roundoff: the cost is two dense `dim x dim` products.
/// Semigroup propagation requires `t >= 0` so the result stays bounded.
pub fn expm_action_eigen(
    eig: &EigenSystem,
    propagation: Propagation,
    t: f64,
    v: &[Complex64],
) -> Result<Vec<Complex64>> {
    if v.len() != eig.dim {
        return Err(Error::parameter(format!(
            "vector length {} does not match dimension {}",
            v.len(),
            eig.dim
        )));
    }
    if !t.is_finite() {
        return Err(Error::parameter("time must be finite"));
    }
    if propagation == Propagation::Semigroup && t < 0.0 {
        return Err(Error::parameter("semigroup propagation requires t >= 0"));
    }
    if t == 0.0 {
        // The exponential is the identity; skipping the spectral round trip
        // keeps zero-time results exact instead of accurate to roundoff.
        return Ok(v.to_vec());
    }

    let m = eig.dim;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        let col = eig.eigenvector(k);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m {
            acc += col[i] * v[i];
        }
        let lambda = eig.eigenvalues[k];
        coeffs[k] = match propagation {
            Propagation::Unitary => acc * Complex64::from_polar(1.0, -lambda * t),
            Propagation::Semigroup => acc * (lambda * t).exp(),
        };
    }

    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        let col = eig.eigenvector(k);
        let w = coeffs[k];
        for i in 0..m {
            out[i] += col[i] * w;
        }
    }
    Ok(out)
}
