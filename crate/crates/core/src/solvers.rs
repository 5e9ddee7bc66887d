//! GD and proximal GD on a [`GsdSpec`], with the two closed-form proxes.

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::gsd::{gradient_smooth, objective, smoothness_bound, GsdSpec, ObjectiveValue};
use crate::linalg::{ensure_same_shape, relu};
use crate::{Error, NormalizedOperators, Result, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSize {
    /// `1/Λ` from [`smoothness_bound`].
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub max_iters: usize,
    pub stepsize: StepSize,
    pub rel_tol: f64,
    pub capture_trajectory: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            stepsize: StepSize::Auto,
            rel_tol: 1e-10,
            capture_trajectory: false,
        }
    }
}

impl SolveConfig {
    pub fn with_iters(max_iters: usize) -> Self {
        Self {
            max_iters,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if let StepSize::Fixed(eta) = self.stepsize {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "stepsize must be finite and > 0, got {eta}"
                )));
            }
        }
        if self.rel_tol.is_nan() || self.rel_tol < 0.0 {
            return Err(Error::InvalidParameter("rel_tol must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub final_signal: Signal,
    /// Objective at `H^{(0)}, H^{(1)}, …`; `+∞` marks an infeasible start.
    #[serde(serialize_with = "serialize_trace")]
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stepsize: f64,
    #[serde(skip)]
    pub trajectory: Option<Vec<Signal>>,
}

fn serialize_trace<S: Serializer>(trace: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(trace.len()))?;
    for &v in trace {
        if v.is_finite() {
            seq.serialize_element(&v)?;
        } else {
            seq.serialize_element("+inf")?;
        }
    }
    seq.end()
}

/// `max(0, ·)` elementwise.
pub fn prox_nonneg(m: &Signal) -> Signal {
    relu(m)
}

/// Row-wise shrinkage of `v` toward `anchor` by `threshold`:
/// `row_i = ReLU(1 − t/‖v_i − a_i‖)(v_i − a_i) + a_i`. A zero residual row
/// returns the anchor row.
pub fn row_shrink(v: &Signal, anchor: &Signal, threshold: f64) -> Result<Signal> {
    ensure_same_shape(v, anchor, "row shrink")?;
    let mut out = anchor.clone();
    for i in 0..v.nrows() {
        let residual = v.row(i) - anchor.row(i);
        let norm = residual.norm();
        if norm == 0.0 {
            continue;
        }
        let scale = (1.0 - threshold / norm).max(0.0);
        if scale > 0.0 {
            let row = anchor.row(i) + residual * scale;
            out.set_row(i, &row);
        }
    }
    Ok(out)
}

/// Minimizer of `(1−β)‖y − x‖₂ + β‖y − v‖₂²` row by row.
pub fn prox_row_l21(v: &Signal, x_anchor: &Signal, beta: f64) -> Result<Signal> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    row_shrink(v, x_anchor, (1.0 - beta) / (2.0 * beta))
}

fn resolve_step(spec: &GsdSpec, ops: &NormalizedOperators, cfg: &SolveConfig) -> f64 {
    match cfg.stepsize {
        StepSize::Fixed(eta) => eta,
        StepSize::Auto => {
            let lambda = smoothness_bound(spec, ops);
            if lambda > 0.0 {
                1.0 / lambda
            } else {
                1.0
            }
        }
    }
}

fn value(v: ObjectiveValue) -> f64 {
    v.finite().unwrap_or(f64::INFINITY)
}

fn iterate(
    spec: &GsdSpec,
    x: &Signal,
    h0: &Signal,
    ops: &NormalizedOperators,
    cfg: &SolveConfig,
    prox: impl Fn(Signal, f64) -> Result<Signal>,
) -> Result<SolveReport> {
    cfg.validate()?;
    let eta = resolve_step(spec, ops, cfg);
    let mut h = h0.clone();
    let mut trace = vec![value(objective(spec, &h, x, ops)?)];
    let mut trajectory = cfg.capture_trajectory.then(|| vec![h.clone()]);
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        let grad = gradient_smooth(spec, &h, x, ops)?;
        h = prox(&h - grad * eta, eta)?;
        iterations += 1;
        let f = value(objective(spec, &h, x, ops)?);
        let prev = *trace.last().expect("trace starts non-empty");
        trace.push(f);
        if let Some(t) = trajectory.as_mut() {
            t.push(h.clone());
        }
        if !f.is_finite() && !prev.is_finite() {
            continue;
        }
        if !f.is_finite() {
            return Err(Error::NoConvergence {
                iterations,
                residual: f64::INFINITY,
            });
        }
        if prev.is_finite() && (prev - f).abs() <= cfg.rel_tol * prev.abs().max(f64::MIN_POSITIVE)
        {
            converged = true;
            break;
        }
    }
    Ok(SolveReport {
        final_signal: h,
        objective_trace: trace,
        iterations,
        converged,
        stepsize: eta,
        trajectory,
    })
}

/// `H ← H − η∇L(H)` for smooth specs.
pub fn gd_run(
    spec: &GsdSpec,
    x: &Signal,
    h0: &Signal,
    ops: &NormalizedOperators,
    cfg: &SolveConfig,
) -> Result<SolveReport> {
    if !spec.is_smooth() {
        return Err(Error::SolverMismatch(
            "objective has a nonsmooth regularizer; use proxgd_run".into(),
        ));
    }
    iterate(spec, x, h0, ops, cfg, |v, _| Ok(v))
}

/// Gradient step on the smooth part followed by the regularizer's prox.
pub fn proxgd_run(
    spec: &GsdSpec,
    x: &Signal,
    h0: &Signal,
    ops: &NormalizedOperators,
    cfg: &SolveConfig,
) -> Result<SolveReport> {
    if spec.is_smooth() {
        return Err(Error::SolverMismatch(
            "objective is smooth; use gd_run".into(),
        ));
    }
    if spec.has_nonneg() {
        iterate(spec, x, h0, ops, cfg, |v, _| Ok(prox_nonneg(&v)))
    } else {
        let w = spec.row_l21_weight().expect("nonsmooth spec without nonneg is row_l21");
        iterate(spec, x, h0, ops, cfg, |v, eta| row_shrink(&v, x, eta * w))
    }
}
