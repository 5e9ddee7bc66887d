//! Per-model unrolled parameterizations, both directions.
//!
//! JKNet and GPRGNN need care: with `H^{(0)} = X` the stacked layers give
//!
//! ```text
//! H^{(K)} = Â^K X Q_1 + Σ_{m<K} Â^m X T^{(K−m)} Q_{K−m+1},
//! Q_j = (I − T^{(j)})(I − T^{(j+1)})…(I − T^{(K)}),  Q_{K+1} = I,
//! ```
//!
//! whose coefficients telescope to `I`. Model weights with any invertible sum
//! `S = Σ W^{(k)}` are therefore factored as `W' S` with `Σ W' = I`, the `W'`
//! are inverted layer by layer, and `S` becomes the plan's post transform.

use crate::linalg::{max_abs_diff, try_inverse};
use crate::spectral::appnp_exact_expansion;
use crate::unrolled::layer::{LayerParams, LayerProx, PostTransform, UnrollPlan};
use crate::unrolled::models::{ModelSpec, Ugdgnn};
use crate::{Error, Matrix, Result};

/// Smallest magnitude accepted for a pivot in the GPRGNN inversion.
const PIVOT_EPS: f64 = 1e-12;

fn jknet_layer(t_alpha: Matrix) -> LayerParams {
    let d = t_alpha.nrows();
    let t_beta = Matrix::identity(d, d) - &t_alpha;
    LayerParams {
        eta: 0.5,
        alpha: 1.0,
        beta: 1.0,
        t_alpha,
        t_beta,
        ridge: 0.0,
        prox: LayerProx::None,
    }
}

fn gpr_layer(d: usize, alpha: f64) -> LayerParams {
    LayerParams::identity(d, 0.5, alpha, 1.0 - alpha)
}

/// Builds the layer plan whose [`run_unrolled`](super::run_unrolled) equals
/// [`forward`](super::forward) of the model. `d` is the input signal width.
pub fn to_unroll_plan(model: &ModelSpec, d: usize) -> Result<UnrollPlan> {
    model.validate()?;
    let id = || Matrix::identity(d, d);
    match model {
        ModelSpec::Sgc { k, w } => {
            if w.nrows() != d {
                return Err(Error::Shape(format!(
                    "sgc weight is {}x{}, signal has {d} columns",
                    w.nrows(),
                    w.ncols()
                )));
            }
            let mut layers = vec![LayerParams::identity(d, 0.5, 0.0, 1.0); *k];
            let post = if w.is_square() {
                let last = layers.last_mut().expect("K >= 1");
                last.t_beta = w.clone();
                last.ridge = 1.0;
                None
            } else {
                Some(PostTransform::Matrix(w.clone()))
            };
            Ok(UnrollPlan::new(layers)?.with_post(post))
        }
        ModelSpec::Ppnp { .. } => Err(Error::InvalidParameter(
            "ppnp is a closed form; compare against a long-horizon appnp instead".into(),
        )),
        ModelSpec::Appnp { k, gamma } => {
            UnrollPlan::new(vec![LayerParams::identity(d, 0.5, *gamma, 1.0 - gamma); *k])
        }
        ModelSpec::Jknet { k, w } => {
            let (t, post) = invert_jknet(w, d)?;
            debug_assert_eq!(t.len(), *k);
            Ok(UnrollPlan::new(t.into_iter().map(jknet_layer).collect())?.with_post(post))
        }
        ModelSpec::Gprgnn { gamma, .. } => {
            let (alphas, scale) = invert_gprgnn(gamma)?;
            let post = (scale != 1.0).then_some(PostTransform::Scale(scale));
            Ok(UnrollPlan::new(alphas.into_iter().map(|a| gpr_layer(d, a)).collect())?
                .with_post(post))
        }
        ModelSpec::Gcn { w, .. } => {
            let layers = w
                .iter()
                .enumerate()
                .map(|(i, wk)| {
                    if wk.shape() != (d, d) {
                        return Err(Error::Shape(format!(
                            "layer {}: unrolled GCN needs a {d}x{d} weight, got {}x{}",
                            i + 1,
                            wk.nrows(),
                            wk.ncols()
                        )));
                    }
                    Ok(LayerParams {
                        eta: 0.5,
                        alpha: 0.0,
                        beta: 1.0,
                        t_alpha: id(),
                        t_beta: wk.clone(),
                        ridge: 1.0,
                        prox: LayerProx::NonNeg,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            UnrollPlan::new(layers)
        }
        ModelSpec::Gcnii { zeta, xi, w, .. } => {
            let layers = w
                .iter()
                .enumerate()
                .map(|(i, wk)| {
                    if wk.shape() != (d, d) {
                        return Err(Error::Shape(format!(
                            "layer {}: GCNII weight must be {d}x{d}, got {}x{}",
                            i + 1,
                            wk.nrows(),
                            wk.ncols()
                        )));
                    }
                    let t = wk * *xi + id() * (1.0 - xi);
                    Ok(LayerParams {
                        eta: 0.5,
                        alpha: 1.0 - zeta,
                        beta: *zeta,
                        t_alpha: t.clone(),
                        t_beta: t,
                        ridge: 1.0,
                        prox: LayerProx::NonNeg,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            UnrollPlan::new(layers)
        }
        ModelSpec::Airgnn { k, gamma } => {
            let mut layer = LayerParams::identity(d, 1.0 / (2.0 * gamma), 0.0, *gamma);
            layer.prox = LayerProx::AirGnnRowL21 { beta: *gamma };
            UnrollPlan::new(vec![layer; *k])
        }
        ModelSpec::Ugdgnn(_) => Err(Error::InvalidParameter(
            "ugdgnn is already the general unrolled form".into(),
        )),
    }
}

/// Per-layer `T_α^{(1)}..T_α^{(K)}` from JKNet weights, plus the post map `S`.
pub fn invert_jknet(w: &[Matrix], d: usize) -> Result<(Vec<Matrix>, Option<PostTransform>)> {
    if w.len() < 2 {
        return Err(Error::InvalidParameter("jknet needs K >= 1".into()));
    }
    for (i, wk) in w.iter().enumerate() {
        if wk.shape() != (d, d) {
            return Err(Error::Shape(format!(
                "layer {i}: unrolled JKNet needs {d}x{d} weights, got {}x{}",
                wk.nrows(),
                wk.ncols()
            )));
        }
    }
    let k = w.len() - 1;
    let id = Matrix::identity(d, d);
    let sum = w.iter().fold(Matrix::zeros(d, d), |acc, m| acc + m);
    let (normalized, post): (Vec<Matrix>, _) = if max_abs_diff(&sum, &id) == 0.0 {
        (w.to_vec(), None)
    } else {
        let inv = try_inverse(&sum).ok_or_else(|| {
            Error::NonInvertible("sum of JKNet weights is singular".into())
        })?;
        (
            w.iter().map(|m| m * &inv).collect(),
            Some(PostTransform::Matrix(sum)),
        )
    };
    // t[j] holds T^{(j)} for j = 1..K
    let mut t = vec![Matrix::zeros(d, d); k + 1];
    t[k] = normalized[0].clone();
    let mut q = &id - &normalized[0];
    for m in 1..k {
        let q_inv = try_inverse(&q).ok_or_else(|| {
            Error::NonInvertible(format!(
                "reconstructed product for layers {}..{k} is singular",
                k - m + 1
            ))
        })?;
        t[k - m] = &normalized[m] * q_inv;
        q -= &normalized[m];
    }
    Ok((t.split_off(1), post))
}

/// Per-layer `α^{(1)}..α^{(K)}` from GPRGNN coefficients, plus the scale `Σγ`.
pub fn invert_gprgnn(gamma: &[f64]) -> Result<(Vec<f64>, f64)> {
    if gamma.len() < 2 {
        return Err(Error::InvalidParameter("gprgnn needs K >= 1".into()));
    }
    let k = gamma.len() - 1;
    let sum: f64 = gamma.iter().sum();
    if sum.abs() < PIVOT_EPS {
        return Err(Error::NonInvertible(format!(
            "gprgnn coefficients sum to {sum:e}"
        )));
    }
    let g: Vec<f64> = if sum == 1.0 {
        gamma.to_vec()
    } else {
        gamma.iter().map(|v| v / sum).collect()
    };
    let mut alpha = vec![0.0; k + 1];
    alpha[k] = g[0];
    let mut q = 1.0 - g[0];
    for m in 1..k {
        if q.abs() < PIVOT_EPS {
            return Err(Error::NonInvertible(format!(
                "partial product for layers {}..{k} vanishes",
                k - m + 1
            )));
        }
        alpha[k - m] = g[m] / q;
        q -= g[m];
    }
    Ok((alpha.split_off(1), sum))
}

/// JKNet weights `W^{(0)}..W^{(K)}` produced by layers `T_α^{(1)}..T_α^{(K)}`.
pub fn jknet_weights_from_layers(t: &[Matrix]) -> Result<Vec<Matrix>> {
    let k = t.len();
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one layer".into()));
    }
    let d = t[0].nrows();
    let id = Matrix::identity(d, d);
    let mut w = vec![Matrix::zeros(d, d); k + 1];
    let mut q = id.clone();
    for m in 0..k {
        let tj = &t[k - 1 - m];
        if tj.shape() != (d, d) {
            return Err(Error::Shape(format!("layer {}: T is not {d}x{d}", k - m)));
        }
        w[m] = tj * &q;
        q = (&id - tj) * q;
    }
    w[k] = q;
    Ok(w)
}

/// GPRGNN coefficients `γ^{(0)}..γ^{(K)}` produced by layers `α^{(1)}..α^{(K)}`.
pub fn gprgnn_gammas_from_alphas(alpha: &[f64]) -> Vec<f64> {
    let k = alpha.len();
    let mut gamma = vec![0.0; k + 1];
    let mut q = 1.0;
    for m in 0..k {
        let a = alpha[k - 1 - m];
        gamma[m] = a * q;
        q *= 1.0 - a;
    }
    gamma[k] = q;
    gamma
}

/// The UGDGNN configuration reproducing SGC, APPNP, JKNet or GPRGNN.
pub fn ugdgnn_specialize(target: &ModelSpec) -> Result<Ugdgnn> {
    target.validate()?;
    match target {
        ModelSpec::Sgc { k, w } => {
            let n = k + 1;
            let mut gamma = vec![0.0; n];
            let zeta = vec![0.0; n];
            let mut xi = vec![0.0; n];
            let mut weights = vec![None; n];
            gamma[*k] = 1.0;
            xi[*k] = 1.0;
            weights[*k] = Some(w.clone());
            Ok(Ugdgnn {
                k: *k,
                gamma,
                zeta,
                xi,
                w: weights,
                tie_xi: false,
            })
        }
        ModelSpec::Appnp { k, gamma } => Ok(Ugdgnn::gpr(appnp_exact_expansion(*k, *gamma)?)),
        ModelSpec::Gprgnn { gamma, .. } => Ok(Ugdgnn::gpr(gamma.clone())),
        ModelSpec::Jknet { k, w } => Ok(Ugdgnn {
            k: *k,
            gamma: vec![1.0; k + 1],
            zeta: vec![0.0; k + 1],
            xi: vec![1.0; k + 1],
            w: w.iter().cloned().map(Some).collect(),
            tie_xi: false,
        }),
        other => Err(Error::InvalidParameter(format!(
            "no UGDGNN specialization for {}",
            other.name()
        ))),
    }
}
