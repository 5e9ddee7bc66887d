//! The general graph signal denoising objective
//!
//! ```text
//! L(H) = α‖H − X‖²_{T_α} + β‖B̂H‖²_{T_β} + r(H),    ‖M‖²_T = tr(M T Mᵀ)
//! ```
//!
//! with `‖B̂H‖²_{T_β}` evaluated as `tr(Hᵀ L̂ H T_β)` so `B̂` is never formed.

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::linalg::{ensure_same_shape, inner, spectral_norm_sym, symmetrize};
use crate::{Error, Matrix, NormalizedOperators, Result, Signal};

/// `r(H)` choices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    #[default]
    None,
    /// Indicator of `{h_ij ≥ 0}`.
    NonNeg,
    /// `w‖H‖²_{I−T_β}`; `w` defaults to `β`.
    RidgeComplement {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<f64>,
    },
    /// Ridge complement plus the nonnegativity indicator.
    RidgeComplementNonNeg {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<f64>,
    },
    /// `w‖H − X‖_{2,1}` anchored at the input signal.
    RowL21 { weight: f64 },
}

/// Objective value; the indicator term yields [`ObjectiveValue::Infeasible`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveValue {
    Finite(f64),
    Infeasible,
}

impl ObjectiveValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infeasible => None,
        }
    }
}

impl Serialize for ObjectiveValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(*v),
            Self::Infeasible => s.serialize_str("+inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GsdSpecDoc", into = "GsdSpecDoc")]
pub struct GsdSpec {
    alpha: f64,
    beta: f64,
    t_alpha: Matrix,
    t_beta: Matrix,
    regularizer: Regularizer,
}

#[derive(Serialize, Deserialize)]
struct GsdSpecDoc {
    alpha: f64,
    beta: f64,
    #[serde(with = "crate::serde_matrix")]
    t_alpha: Matrix,
    #[serde(with = "crate::serde_matrix")]
    t_beta: Matrix,
    #[serde(default)]
    regularizer: Regularizer,
}

impl TryFrom<GsdSpecDoc> for GsdSpec {
    type Error = Error;

    fn try_from(d: GsdSpecDoc) -> Result<Self> {
        GsdSpec::new(d.alpha, d.beta, d.t_alpha, d.t_beta, d.regularizer)
    }
}

impl From<GsdSpec> for GsdSpecDoc {
    fn from(s: GsdSpec) -> Self {
        Self {
            alpha: s.alpha,
            beta: s.beta,
            t_alpha: s.t_alpha,
            t_beta: s.t_beta,
            regularizer: s.regularizer,
        }
    }
}

impl GsdSpec {
    /// Validates the scalars and symmetrizes both `T` matrices as `(M + Mᵀ)/2`.
    pub fn new(
        alpha: f64,
        beta: f64,
        t_alpha: Matrix,
        t_beta: Matrix,
        regularizer: Regularizer,
    ) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) || !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha and beta must be finite and >= 0 (alpha={alpha}, beta={beta})"
            )));
        }
        if !t_alpha.is_square() || !t_beta.is_square() || t_alpha.nrows() != t_beta.nrows() {
            return Err(Error::Shape(format!(
                "T_alpha {}x{} and T_beta {}x{} must be square with equal size",
                t_alpha.nrows(),
                t_alpha.ncols(),
                t_beta.nrows(),
                t_beta.ncols()
            )));
        }
        match regularizer {
            Regularizer::RidgeComplement { weight: Some(w) }
            | Regularizer::RidgeComplementNonNeg { weight: Some(w) }
            | Regularizer::RowL21 { weight: w }
                if !(w >= 0.0 && w.is_finite()) =>
            {
                return Err(Error::InvalidParameter(format!(
                    "regularizer weight must be finite and >= 0, got {w}"
                )));
            }
            _ => {}
        }
        Ok(Self {
            alpha,
            beta,
            t_alpha: symmetrize(&t_alpha),
            t_beta: symmetrize(&t_beta),
            regularizer,
        })
    }

    /// `T_α = T_β = I` in dimension `d`.
    pub fn identity(d: usize, alpha: f64, beta: f64, regularizer: Regularizer) -> Result<Self> {
        Self::new(
            alpha,
            beta,
            Matrix::identity(d, d),
            Matrix::identity(d, d),
            regularizer,
        )
    }

    /// The objective that PPNP solves in closed form: `β = 1 − γ`, `T = I`, no `r`.
    pub fn ppnp(d: usize, gamma: f64) -> Result<Self> {
        Self::identity(d, gamma, 1.0 - gamma, Regularizer::None)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn t_alpha(&self) -> &Matrix {
        &self.t_alpha
    }

    pub fn t_beta(&self) -> &Matrix {
        &self.t_beta
    }

    pub fn regularizer(&self) -> Regularizer {
        self.regularizer
    }

    pub fn dim(&self) -> usize {
        self.t_alpha.nrows()
    }

    /// Weight on `‖H‖²_{I−T_β}` (zero when absent).
    pub fn ridge_weight(&self) -> f64 {
        match self.regularizer {
            Regularizer::RidgeComplement { weight } | Regularizer::RidgeComplementNonNeg { weight } => {
                weight.unwrap_or(self.beta)
            }
            _ => 0.0,
        }
    }

    pub fn has_nonneg(&self) -> bool {
        matches!(
            self.regularizer,
            Regularizer::NonNeg | Regularizer::RidgeComplementNonNeg { .. }
        )
    }

    pub fn row_l21_weight(&self) -> Option<f64> {
        match self.regularizer {
            Regularizer::RowL21 { weight } => Some(weight),
            _ => None,
        }
    }

    /// True when `r` has no nonsmooth part and plain GD applies.
    pub fn is_smooth(&self) -> bool {
        !self.has_nonneg() && self.row_l21_weight().is_none()
    }

    fn check_shapes(&self, h: &Signal, x: &Signal, ops: &NormalizedOperators) -> Result<()> {
        ensure_same_shape(h, x, "H vs X")?;
        if h.nrows() != ops.num_nodes() {
            return Err(Error::Shape(format!(
                "signal has {} rows, graph has {} nodes",
                h.nrows(),
                ops.num_nodes()
            )));
        }
        if h.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "signal has {} columns, T matrices are {}x{}",
                h.ncols(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `tr(M T Mᵀ)`.
pub fn weighted_norm_sq(m: &Matrix, t: &Matrix) -> Result<f64> {
    if !t.is_square() || m.ncols() != t.nrows() {
        return Err(Error::Shape(format!(
            "weighted norm: M is {}x{}, T is {}x{}",
            m.nrows(),
            m.ncols(),
            t.nrows(),
            t.ncols()
        )));
    }
    Ok(inner(&(m * t), m))
}

/// Full objective value including every regularizer term.
pub fn objective(
    spec: &GsdSpec,
    h: &Signal,
    x: &Signal,
    ops: &NormalizedOperators,
) -> Result<ObjectiveValue> {
    spec.check_shapes(h, x, ops)?;
    if spec.has_nonneg() && h.iter().any(|&v| v < 0.0) {
        return Ok(ObjectiveValue::Infeasible);
    }
    let mut value = smooth_objective_unchecked(spec, h, x, ops)?;
    if let Some(w) = spec.row_l21_weight() {
        value += w * row_l21_norm(&(h - x));
    }
    Ok(ObjectiveValue::Finite(value))
}

/// Smooth part: fidelity, smoothness and ridge terms.
pub fn smooth_objective(
    spec: &GsdSpec,
    h: &Signal,
    x: &Signal,
    ops: &NormalizedOperators,
) -> Result<f64> {
    spec.check_shapes(h, x, ops)?;
    smooth_objective_unchecked(spec, h, x, ops)
}

fn smooth_objective_unchecked(
    spec: &GsdSpec,
    h: &Signal,
    x: &Signal,
    ops: &NormalizedOperators,
) -> Result<f64> {
    let d = spec.dim();
    let mut value = 0.0;
    if spec.alpha != 0.0 {
        value += spec.alpha * weighted_norm_sq(&(h - x), &spec.t_alpha)?;
    }
    if spec.beta != 0.0 {
        let lh = ops.laplacian_apply(h)?;
        value += spec.beta * inner(&(h * &spec.t_beta), &lh);
    }
    let ridge = spec.ridge_weight();
    if ridge != 0.0 {
        let complement = Matrix::identity(d, d) - &spec.t_beta;
        value += ridge * weighted_norm_sq(h, &complement)?;
    }
    Ok(value)
}

pub fn row_l21_norm(m: &Matrix) -> f64 {
    m.row_iter().map(|r| r.norm()).sum()
}

/// `∇ = 2α(H−X)T_α + 2β L̂ H T_β + 2w H (I − T_β)`.
pub fn gradient_smooth(
    spec: &GsdSpec,
    h: &Signal,
    x: &Signal,
    ops: &NormalizedOperators,
) -> Result<Signal> {
    spec.check_shapes(h, x, ops)?;
    let d = spec.dim();
    let mut grad = Matrix::zeros(h.nrows(), h.ncols());
    if spec.alpha != 0.0 {
        grad += (h - x) * &spec.t_alpha * (2.0 * spec.alpha);
    }
    if spec.beta != 0.0 {
        grad += ops.laplacian_apply(h)? * &spec.t_beta * (2.0 * spec.beta);
    }
    let ridge = spec.ridge_weight();
    if ridge != 0.0 {
        let complement = Matrix::identity(d, d) - &spec.t_beta;
        grad += h * complement * (2.0 * ridge);
    }
    Ok(grad)
}

/// Solver selection for [`closed_form_ppnp_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpnpMethod {
    /// Dense Cholesky up to [`DENSE_PPNP_LIMIT`] nodes, CG above.
    Auto,
    Dense,
    ConjugateGradient,
}

pub const DENSE_PPNP_LIMIT: usize = 4096;
const CG_TOL: f64 = 1e-13;

/// `γ (I − (1−γ)Â)^{-1} X`.
pub fn closed_form_ppnp(ops: &NormalizedOperators, x: &Signal, gamma: f64) -> Result<Signal> {
    closed_form_ppnp_with(ops, x, gamma, PpnpMethod::Auto)
}

pub fn closed_form_ppnp_with(
    ops: &NormalizedOperators,
    x: &Signal,
    gamma: f64,
    method: PpnpMethod,
) -> Result<Signal> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    let n = ops.num_nodes();
    if x.nrows() != n {
        return Err(Error::Shape(format!(
            "signal has {} rows, graph has {n} nodes",
            x.nrows()
        )));
    }
    if gamma == 1.0 {
        return Ok(x.clone());
    }
    let rhs = x * gamma;
    let dense = match method {
        PpnpMethod::Auto => n <= DENSE_PPNP_LIMIT,
        PpnpMethod::Dense => true,
        PpnpMethod::ConjugateGradient => false,
    };
    if dense {
        let system = Matrix::identity(n, n) - ops.dense_a_hat() * (1.0 - gamma);
        let chol = Cholesky::new(system).ok_or_else(|| {
            Error::InvalidParameter("PPNP system is not positive definite".to_string())
        })?;
        Ok(chol.solve(&rhs))
    } else {
        conjugate_gradient(ops, &rhs, gamma, 10 * n + 100)
    }
}

/// Column-wise CG on `(I − (1−γ)Â) Y = R`; eigenvalues lie in `[γ, 2−γ]`.
fn conjugate_gradient(
    ops: &NormalizedOperators,
    rhs: &Signal,
    gamma: f64,
    max_iters: usize,
) -> Result<Signal> {
    let apply = |v: &Matrix| -> Result<Matrix> { Ok(v - ops.spmm(v)? * (1.0 - gamma)) };
    let mut out = Matrix::zeros(rhs.nrows(), rhs.ncols());
    for j in 0..rhs.ncols() {
        let b = rhs.columns(j, 1).into_owned();
        let b_norm = b.norm();
        if b_norm == 0.0 {
            continue;
        }
        let mut y = Matrix::zeros(b.nrows(), 1);
        let mut r = b.clone();
        let mut p = r.clone();
        let mut rs = r.norm_squared();
        let mut converged = false;
        for _ in 0..max_iters {
            let ap = apply(&p)?;
            let step = rs / p.dot(&ap);
            y += &p * step;
            r -= &ap * step;
            let rs_next = r.norm_squared();
            if rs_next.sqrt() <= CG_TOL * b_norm {
                converged = true;
                break;
            }
            p = &r + &p * (rs_next / rs);
            rs = rs_next;
        }
        if !converged {
            return Err(Error::NoConvergence {
                iterations: max_iters,
                residual: r.norm() / b_norm,
            });
        }
        out.set_column(j, &y.column(0));
    }
    Ok(out)
}

/// Lipschitz bound for `∇L`: `2α‖T_α‖₂ + 4β‖T_β‖₂ + 2w‖I − T_β‖₂`, using
/// `λ_max(L̂) ≤ 2`.
pub fn smoothness_bound(spec: &GsdSpec, _ops: &NormalizedOperators) -> f64 {
    let d = spec.dim();
    let norm = |m: &Matrix| spectral_norm_sym(m, 10_000, 1e-14).value;
    let mut bound = 2.0 * spec.alpha * norm(&spec.t_alpha) + 4.0 * spec.beta * norm(&spec.t_beta);
    let ridge = spec.ridge_weight();
    if ridge != 0.0 {
        bound += 2.0 * ridge * norm(&(Matrix::identity(d, d) - &spec.t_beta));
    }
    bound
}
