//! The generic unrolled GD / ProxGD layer.
//!
//! One layer maps `H ↦ prox(V)` with
//!
//! ```text
//! V = H − η [ 2α(H − X)T_α + 2β(H − ÂH)T_β + 2ρ H(I − T_β) ]
//! ```
//!
//! where `ρ` is the weight of the ridge-complement term (zero when absent).

use crate::linalg::{is_symmetric, relu};
use crate::solvers::row_shrink;
use crate::{Error, Matrix, NormalizedOperators, Result, Signal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerProx {
    None,
    NonNeg,
    /// Prox of `η(1−β)‖H − X‖_{2,1}`, i.e. row shrinkage by `η(1−β)`.
    AirGnnRowL21 { beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t_alpha: Matrix,
    pub t_beta: Matrix,
    pub ridge: f64,
    pub prox: LayerProx,
}

impl LayerParams {
    /// `T_α = T_β = I_d`, no ridge, no prox.
    pub fn identity(d: usize, eta: f64, alpha: f64, beta: f64) -> Self {
        Self {
            eta,
            alpha,
            beta,
            t_alpha: Matrix::identity(d, d),
            t_beta: Matrix::identity(d, d),
            ridge: 0.0,
            prox: LayerProx::None,
        }
    }

    pub fn dim(&self) -> usize {
        self.t_alpha.nrows()
    }

    fn validate(&self, index: usize) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "layer {}: eta must be finite and > 0, got {}",
                index + 1,
                self.eta
            )));
        }
        let d = self.t_alpha.nrows();
        if !self.t_alpha.is_square() || self.t_beta.shape() != (d, d) {
            return Err(Error::Shape(format!(
                "layer {}: T_alpha {:?} and T_beta {:?} must be square and equal-sized",
                index + 1,
                self.t_alpha.shape(),
                self.t_beta.shape()
            )));
        }
        Ok(())
    }

    /// Applies the layer to `h` with anchor signal `x`.
    pub fn apply(&self, ops: &NormalizedOperators, h: &Signal, x: &Signal) -> Result<Signal> {
        let d = self.dim();
        if h.ncols() != d || x.shape() != h.shape() {
            return Err(Error::Shape(format!(
                "layer expects {d} columns and matching H/X, got H {:?}, X {:?}",
                h.shape(),
                x.shape()
            )));
        }
        let mut step = Matrix::zeros(h.nrows(), d);
        if self.alpha != 0.0 {
            step += (h - x) * &self.t_alpha * (2.0 * self.alpha);
        }
        if self.beta != 0.0 {
            step += ops.laplacian_apply(h)? * &self.t_beta * (2.0 * self.beta);
        }
        if self.ridge != 0.0 {
            step += h * (Matrix::identity(d, d) - &self.t_beta) * (2.0 * self.ridge);
        }
        let v = h - step * self.eta;
        match self.prox {
            LayerProx::None => Ok(v),
            LayerProx::NonNeg => Ok(relu(&v)),
            LayerProx::AirGnnRowL21 { beta } => row_shrink(&v, x, self.eta * (1.0 - beta)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum H0Policy {
    #[default]
    InputSignal,
    Zero,
}

/// Output map applied after the last layer.
#[derive(Debug, Clone, PartialEq)]
pub enum PostTransform {
    Scale(f64),
    Matrix(Matrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnrollPlan {
    pub layers: Vec<LayerParams>,
    pub h0_policy: H0Policy,
    pub post_transform: Option<PostTransform>,
}

impl UnrollPlan {
    pub fn new(layers: Vec<LayerParams>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter(
                "an unroll plan needs at least one layer".into(),
            ));
        }
        Ok(Self {
            layers,
            h0_policy: H0Policy::InputSignal,
            post_transform: None,
        })
    }

    pub fn with_post(mut self, post: Option<PostTransform>) -> Self {
        self.post_transform = post;
        self
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// True when every layer is a step on a proper GSD objective: symmetric
    /// `T` matrices and nonnegative `α`, `β`.
    pub fn is_gsd_consistent(&self, tol: f64) -> bool {
        self.layers.iter().all(|l| {
            l.alpha >= 0.0
                && l.beta >= 0.0
                && is_symmetric(&l.t_alpha, tol)
                && is_symmetric(&l.t_beta, tol)
        })
    }
}

/// Runs every layer from `H^{(0)}` and applies the post transform.
pub fn run_unrolled(plan: &UnrollPlan, ops: &NormalizedOperators, x: &Signal) -> Result<Signal> {
    if plan.layers.is_empty() {
        return Err(Error::InvalidParameter("empty unroll plan".into()));
    }
    if x.nrows() != ops.num_nodes() {
        return Err(Error::Shape(format!(
            "signal has {} rows, graph has {} nodes",
            x.nrows(),
            ops.num_nodes()
        )));
    }
    let mut h = match plan.h0_policy {
        H0Policy::InputSignal => x.clone(),
        H0Policy::Zero => Matrix::zeros(x.nrows(), x.ncols()),
    };
    for (i, layer) in plan.layers.iter().enumerate() {
        layer.validate(i)?;
        h = layer.apply(ops, &h, x).map_err(|e| match e {
            Error::Shape(msg) => Error::Shape(format!("layer {}: {msg}", i + 1)),
            other => other,
        })?;
    }
    match &plan.post_transform {
        None => Ok(h),
        Some(PostTransform::Scale(s)) => Ok(h * *s),
        Some(PostTransform::Matrix(m)) => {
            if m.nrows() != h.ncols() {
                return Err(Error::Shape(format!(
                    "post transform is {:?}, output has {} columns",
                    m.shape(),
                    h.ncols()
                )));
            }
            Ok(h * m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{add_self_loops, normalize, Graph};

    #[test]
    fn zero_update_returns_h0() {
        let ops = normalize(&add_self_loops(&Graph::new(3, [(0, 1), (1, 2)]).unwrap())).unwrap();
        let x = Matrix::from_fn(3, 2, |i, j| i as f64 - j as f64);
        let plan = UnrollPlan::new(vec![LayerParams::identity(2, 0.3, 0.0, 0.0)]).unwrap();
        assert_eq!(run_unrolled(&plan, &ops, &x).unwrap(), x);
    }

    #[test]
    fn rejects_bad_eta_and_empty_plan() {
        assert!(UnrollPlan::new(vec![]).is_err());
        let ops = normalize(&add_self_loops(&Graph::new(1, []).unwrap())).unwrap();
        let x = Matrix::from_element(1, 1, 1.0);
        let plan = UnrollPlan::new(vec![LayerParams::identity(1, 0.0, 1.0, 0.0)]).unwrap();
        assert!(run_unrolled(&plan, &ops, &x).is_err());
    }

    #[test]
    fn shape_error_names_layer() {
        let ops = normalize(&add_self_loops(&Graph::new(2, [(0, 1)]).unwrap())).unwrap();
        let x = Matrix::zeros(2, 3);
        let plan = UnrollPlan::new(vec![LayerParams::identity(2, 0.5, 1.0, 0.0)]).unwrap();
        match run_unrolled(&plan, &ops, &x) {
            Err(Error::Shape(msg)) => assert!(msg.starts_with("layer 1"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
