//! Small dense helpers shared across modules.

use crate::{Error, Matrix, Result};

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn is_symmetric(m: &Matrix, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol
}

/// `max |a_ij - b_ij|`; infinite when shapes differ.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn relu(m: &Matrix) -> Matrix {
    m.map(|v| v.max(0.0))
}

/// Frobenius inner product `⟨a, b⟩ = Σ a_ij b_ij`.
pub fn inner(a: &Matrix, b: &Matrix) -> f64 {
    a.dot(b)
}

pub fn ensure_finite(m: &Matrix) -> Result<()> {
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if !m[(r, c)].is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

pub fn ensure_same_shape(a: &Matrix, b: &Matrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "{what}: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Outcome of [`spectral_norm_sym`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// `false` when power iteration stalled and the Frobenius bound was used.
    pub converged: bool,
}

/// Spectral norm of a symmetric matrix by power iteration on `M²`.
///
/// Falls back to the Frobenius norm (an upper bound) when the iteration does
/// not settle within `max_iters`.
pub fn spectral_norm_sym(m: &Matrix, max_iters: usize, tol: f64) -> NormEstimate {
    let n = m.nrows();
    if n == 0 {
        return NormEstimate {
            value: 0.0,
            converged: true,
        };
    }
    let frob = m.norm();
    if frob == 0.0 {
        return NormEstimate {
            value: 0.0,
            converged: true,
        };
    }
    let sq = m * m;
    // deterministic start with no symmetry that could hide an eigenvector
    let mut v = nalgebra::DVector::from_fn(n, |i, _| 1.0 + 0.1 * (i as f64 + 1.0).sqrt());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..max_iters {
        let w = &sq * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return NormEstimate {
                value: 0.0,
                converged: true,
            };
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= tol * next.abs().max(f64::MIN_POSITIVE) {
            let est = next.max(0.0).sqrt();
            return NormEstimate {
                value: est.min(frob),
                converged: true,
            };
        }
        lambda = next;
    }
    NormEstimate {
        value: frob,
        converged: false,
    }
}

/// Square-matrix inverse via LU; `None` when singular or badly conditioned.
pub fn try_inverse(m: &Matrix) -> Option<Matrix> {
    if !m.is_square() {
        return None;
    }
    let inv = m.clone().try_inverse()?;
    if inv.iter().all(|v| v.is_finite()) {
        Some(inv)
    } else {
        None
    }
}
