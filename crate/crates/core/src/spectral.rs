//! Polynomial filters `Σ θ_k L̂^k` and their coefficient mappings onto the
//! propagation schemes.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::unrolled::models::{gcnii_propagate, Ugdgnn};
use crate::{Error, Matrix, NormalizedOperators, Result, Signal};

/// Largest order accepted by the binomial mapping.
pub const MAX_BINOMIAL_ORDER: usize = 60;
/// Largest graph for the dense eigensolve in [`frequency_response`].
pub const DENSE_EIGEN_LIMIT: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCoeffs {
    theta: Vec<f64>,
}

impl FilterCoeffs {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidParameter("filter needs at least theta_0".into()));
        }
        if let Some(i) = theta.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("theta_{i} is not finite")));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn order(&self) -> usize {
        self.theta.len() - 1
    }

    /// `Σ θ_k λ^k` by Horner's rule.
    pub fn response(&self, lambda: f64) -> f64 {
        self.theta.iter().rev().fold(0.0, |acc, &t| acc * lambda + t)
    }
}

/// `(Σ θ_k L̂^k) X` by Horner's rule with `L̂v = v − Âv`.
pub fn apply_polynomial_filter(
    theta: &FilterCoeffs,
    ops: &NormalizedOperators,
    x: &Signal,
) -> Result<Signal> {
    let t = theta.theta();
    let mut y = x * t[t.len() - 1];
    for &tk in t[..t.len() - 1].iter().rev() {
        y = ops.laplacian_apply(&y)? + x * tk;
    }
    Ok(y)
}

/// Exact `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc · (n − i) is divisible by (i + 1) at every step
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `γ_i = (−1)^i Σ_{k≥i} θ_k C(k, i)`: the coefficients over `Â^i`.
pub fn theta_to_adjacency_coeffs(theta: &FilterCoeffs) -> Result<Vec<f64>> {
    let k_max = theta.order();
    if k_max > MAX_BINOMIAL_ORDER {
        return Err(Error::InvalidParameter(format!(
            "filter order {k_max} exceeds the binomial limit {MAX_BINOMIAL_ORDER}"
        )));
    }
    let t = theta.theta();
    Ok((0..=k_max)
        .map(|i| {
            let s: f64 = (i..=k_max).map(|k| t[k] * binomial(k, i) as f64).sum();
            if i % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect())
}

/// UGDGNN (`ζ = 1`, `ξ = 0`) realizing the filter.
pub fn theta_to_ugdgnn(theta: &FilterCoeffs) -> Result<Ugdgnn> {
    Ok(Ugdgnn::gpr(theta_to_adjacency_coeffs(theta)?))
}

/// `θ_k = (−1)^k C(K, k)`, the filter `(I − L̂)^K = Â^K`.
pub fn sgc_implied_theta(k: usize) -> Result<FilterCoeffs> {
    if k == 0 {
        return Err(Error::InvalidParameter("sgc needs K >= 1".into()));
    }
    if k > MAX_BINOMIAL_ORDER {
        return Err(Error::InvalidParameter(format!(
            "K = {k} exceeds the binomial limit {MAX_BINOMIAL_ORDER}"
        )));
    }
    FilterCoeffs::new(
        (0..=k)
            .map(|i| {
                let c = binomial(k, i) as f64;
                if i % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .collect(),
    )
}

/// Exact APPNP coefficients over `Â^k`: `γ(1−γ)^k` for `k < K`, `(1−γ)^K` last.
pub fn appnp_exact_expansion(k: usize, gamma: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in [0, 1], got {gamma}"
        )));
    }
    let mut c = Vec::with_capacity(k + 1);
    let mut p = 1.0;
    for _ in 0..k {
        c.push(gamma * p);
        p *= 1.0 - gamma;
    }
    c.push(p);
    Ok(c)
}

/// `Σ c_k Â^k X`.
pub fn apply_adjacency_series(
    coeffs: &[f64],
    ops: &NormalizedOperators,
    x: &Signal,
) -> Result<Signal> {
    let mut p = x.clone();
    let mut out = Matrix::zeros(x.nrows(), x.ncols());
    for (k, &c) in coeffs.iter().enumerate() {
        if k > 0 {
            p = ops.spmm(&p)?;
        }
        out += &p * c;
    }
    Ok(out)
}

/// Scalar weights of a linearized GCNII (`ζ = ½`, no activation,
/// `ξW^{(k)} + (1−ξ)I = 2w^{(k)} I`).
///
/// Each layer is `H ← w^{(k)}(ÂH + X)`. Starting from `H^{(0)} = w^{(0)} X`
/// the output is `Σ_m c_m Â^m X` with `c_m = w^{(K−m)}…w^{(K)}` for `m < K`
/// and `c_K = w^{(0)} c_{K−1}`, so matching the filter's `Â`-coefficients
/// needs every `c_m` with `m < K` nonzero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcniiFilterWeights {
    /// `w^{(0)}`, the scale on the initial point.
    pub input_scale: f64,
    /// `w^{(1)}..w^{(K)}`.
    pub layer_weights: Vec<f64>,
    pub note: String,
}

pub fn gcnii_filter_weights(theta: &FilterCoeffs) -> Result<GcniiFilterWeights> {
    let c = theta_to_adjacency_coeffs(theta)?;
    let k = theta.order();
    if k == 0 {
        return Ok(GcniiFilterWeights {
            input_scale: c[0],
            layer_weights: Vec::new(),
            note: "order-0 filter: no layers, the output is input_scale * X".into(),
        });
    }
    let mut w = vec![0.0; k + 1];
    w[k] = c[0];
    for m in 1..=k {
        if c[m - 1] == 0.0 {
            return Err(Error::NotExpressible(format!(
                "coefficient on A^{} is zero, so the ratio for A^{m} is undefined",
                m - 1
            )));
        }
        let ratio = c[m] / c[m - 1];
        if m < k {
            w[k - m] = ratio;
        } else {
            w[0] = ratio;
        }
    }
    let input_scale = w[0];
    Ok(GcniiFilterWeights {
        input_scale,
        layer_weights: w.split_off(1),
        note: "linearized GCNII: activation dropped, zeta = 1/2, xi*W + (1-xi)*I = 2w*I, H0 = input_scale * X".into(),
    })
}

/// Runs the literal GCNII recursion without activation, `ζ = ½`, `ξ = 1` and
/// `W^{(k)} = 2w^{(k)} I`, from `H^{(0)} = w^{(0)} X`.
pub fn gcnii_linear_forward(
    weights: &GcniiFilterWeights,
    ops: &NormalizedOperators,
    x: &Signal,
) -> Result<Signal> {
    let d = x.ncols();
    let w: Vec<Matrix> = weights
        .layer_weights
        .iter()
        .map(|&wk| Matrix::identity(d, d) * (2.0 * wk))
        .collect();
    gcnii_propagate(ops, x, x * weights.input_scale, 0.5, 1.0, &w, false)
}

/// `(λ, Σ θ_k λ^k)` at every eigenvalue of `L̂`, ascending.
pub fn frequency_response(theta: &FilterCoeffs, ops: &NormalizedOperators) -> Result<Vec<(f64, f64)>> {
    let mut lambdas = laplacian_eigenvalues(ops)?;
    lambdas.sort_by(f64::total_cmp);
    Ok(lambdas.into_iter().map(|l| (l, theta.response(l))).collect())
}

/// Eigenvalues of `L̂` by dense symmetric eigensolve (unsorted).
pub fn laplacian_eigenvalues(ops: &NormalizedOperators) -> Result<Vec<f64>> {
    let n = ops.num_nodes();
    if n > DENSE_EIGEN_LIMIT {
        return Err(Error::TooLarge {
            nodes: n,
            limit: DENSE_EIGEN_LIMIT,
        });
    }
    Ok(SymmetricEigen::new(ops.dense_laplacian())
        .eigenvalues
        .iter()
        .copied()
        .collect())
}
