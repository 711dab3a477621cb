//! Krylov-subspace matrix exponential actions for sparse operators.
//!
//! Lanczos projection with full reorthogonalization turns `exp(-i A t) v`
//! (or `exp(A t) v`) into a small tridiagonal problem per time step. Steps
//! are sized adaptively from an a-posteriori error estimate, so long
//! evolutions are split automatically and short ones finish in one step.

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{eigh_tridiagonal, expm_action_eigen, Propagation, SparseSymmetric, SymTridiagonal};

/// Tuning knobs for [`expm_action_krylov`].
#[derive(Debug, Clone)]
pub struct KrylovOptions {
    /// Target relative 2-norm error of the final vector.
    pub tolerance: f64,
    /// Maximum Lanczos basis size per restart.
    pub max_basis: usize,
    /// Hard cap on accepted time steps before giving up.
    pub max_substeps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions { tolerance: 1e-10, max_basis: 30, max_substeps: 100_000 }
    }
}

struct LanczosFactorization {
    basis: Vec<Vec<Complex64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// The rejected next coupling; zero signals an exactly invariant subspace.
    beta_tail: f64,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn lanczos(
    a: &SparseSymmetric,
    start: &[Complex64],
    start_norm: f64,
    max_basis: usize,
    breakdown_scale: f64,
) -> LanczosFactorization {
    let dim = a.dim();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_basis);
    let mut alpha = Vec::with_capacity(max_basis);
    let mut beta = Vec::with_capacity(max_basis);

    let q0: Vec<Complex64> = start.iter().map(|z| z / start_norm).collect();
    basis.push(q0);

    let mut beta_tail = 0.0;
    for j in 0..max_basis {
        let mut u = a.matvec_complex(&basis[j]);
        if j > 0 {
            let b = beta[j - 1];
            for i in 0..dim {
                u[i] -= basis[j - 1][i] * b;
            }
        }
        let aj: f64 = basis[j].iter().zip(&u).map(|(q, x)| (q.conj() * x).re).sum();
        alpha.push(aj);
        for i in 0..dim {
            u[i] -= basis[j][i] * aj;
        }
        // Full reorthogonalization keeps the basis usable at dimension 30.
        for q in &basis {
            let overlap: Complex64 = q.iter().zip(&u).map(|(qi, xi)| qi.conj() * xi).sum();
            for i in 0..dim {
                u[i] -= q[i] * overlap;
            }
        }
        let b = norm(&u);
        if b <= breakdown_scale {
            beta_tail = 0.0;
            break;
        }
        if j + 1 == max_basis {
            beta_tail = b;
            break;
        }
        beta.push(b);
        basis.push(u.iter().map(|z| z / b).collect());
    }

    LanczosFactorization { basis, alpha, beta, beta_tail }
}

/// Applies `exp(-i A t) v` (unitary) or `exp(A t) v` (semigroup) without
/// forming the exponential, to relative accuracy `opts.tolerance`.
///
/// Requires `t >= 0`. Fails with a numerical error if the adaptive stepper
/// cannot meet the tolerance within `opts.max_substeps` accepted steps.
pub fn expm_action_krylov(
    a: &SparseSymmetric,
    propagation: Propagation,
    t: f64,
    v: &[Complex64],
    opts: &KrylovOptions,
) -> Result<Vec<Complex64>> {
    if v.len() != a.dim() {
        return Err(Error::parameter(format!(
            "vector length {} does not match dimension {}",
            v.len(),
            a.dim()
        )));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::parameter("time must be finite and >= 0"));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::parameter("tolerance must be positive"));
    }
    if opts.max_basis < 2 {
        return Err(Error::parameter("Krylov basis must allow at least 2 vectors"));
    }

    let input_norm = norm(v);
    if t == 0.0 || input_norm == 0.0 {
        return Ok(v.to_vec());
    }

    let anorm = a.max_abs_row_sum();
    let breakdown_scale = 1e-13 * anorm.max(1.0);
    let mut w = v.to_vec();
    let mut remaining = t;
    let mut dt = if anorm > 0.0 { (opts.max_basis as f64 / anorm).min(t) } else { t };
    let mut steps = 0usize;

    while remaining > 0.0 {
        steps += 1;
        if steps > opts.max_substeps {
            return Err(Error::numerical(format!(
                "matrix exponential did not reach tolerance {} within {} steps",
                opts.tolerance, opts.max_substeps
            )));
        }

        let w_norm = norm(&w);
        if w_norm == 0.0 {
            return Ok(w);
        }
        let fac = lanczos(a, &w, w_norm, opts.max_basis, breakdown_scale);
        let k = fac.alpha.len();
        let small = SymTridiagonal::new(fac.alpha.clone(), fac.beta.clone())?;
        let eig = eigh_tridiagonal(&small)?;

        if fac.beta_tail == 0.0 {
            // Invariant subspace: the projected evolution is exact.
            dt = remaining;
        } else {
            dt = dt.min(remaining);
        }

        let mut e1 = vec![Complex64::new(0.0, 0.0); k];
        e1[0] = Complex64::new(w_norm, 0.0);

        let (y, accepted_dt) = loop {
            let y = expm_action_eigen(&eig, propagation, dt, &e1)?;
            let estimate = fac.beta_tail * y[k - 1].norm();
            let budget = 0.5 * opts.tolerance * input_norm * (dt / t);
            if estimate <= budget {
                // Room to spare: let the next step stretch.
                if estimate < 0.1 * budget {
                    break (y, dt * 1.5);
                }
                break (y, dt);
            }
            dt *= 0.5;
            if !(dt > 0.0) {
                return Err(Error::numerical(
                    "matrix exponential step size underflowed before reaching tolerance",
                ));
            }
        };

        let mut next = vec![Complex64::new(0.0, 0.0); a.dim()];
        for (q, &c) in fac.basis.iter().zip(&y) {
            for i in 0..a.dim() {
                next[i] += q[i] * c;
            }
        }
        remaining -= dt.min(remaining);
        w = next;
        dt = accepted_dt;
    }

    Ok(w)
}
