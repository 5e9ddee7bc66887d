//! Trainable UGDGNN: `logits = Σ_k γ_k P_k (ζ_k I + ξ_k W_k)` with
//! `P_k = Â^k p_pre(X)` and an optional affine `p_pre(X) = XM + 1bᵀ`.
//!
//! Because `p_pre` is affine, `Â^k p_pre(X) = (Â^k X) M + (Â^k 1) bᵀ`, so the
//! powers of `Â` applied to `X` and to `1` are computed once per input
//! ([`PropagationBase`]) and reused across every parameter update.

use nalgebra::DVector;
use rand::Rng;

use crate::linalg::inner;
use crate::{Error, Matrix, NormalizedOperators, Result, Signal};

#[derive(Debug, Clone, PartialEq)]
pub struct PreMap {
    pub m: Matrix,
    /// Bias as a `1 × h` row.
    pub b: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UgdgnnParams {
    pub gamma: Vec<f64>,
    pub zeta: Vec<f64>,
    /// Used only when `tie_xi` is false.
    pub xi: Vec<f64>,
    pub w: Vec<Matrix>,
    pub pre_map: Option<PreMap>,
    pub tie_xi: bool,
    generation: u64,
}

/// Glorot/Xavier uniform: `U(−a, a)` with `a = √(6/(fan_in + fan_out))`.
pub fn glorot_uniform<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-a..a))
}

impl UgdgnnParams {
    /// Checks lengths and widths. The identity branch needs the propagated
    /// width to equal the class count.
    pub fn new(
        gamma: Vec<f64>,
        zeta: Vec<f64>,
        xi: Vec<f64>,
        w: Vec<Matrix>,
        pre_map: Option<PreMap>,
        tie_xi: bool,
        d_in: usize,
    ) -> Result<Self> {
        let n = gamma.len();
        if n == 0 || zeta.len() != n || w.len() != n || (!tie_xi && xi.len() != n) {
            return Err(Error::Shape(format!(
                "need K+1 entries each: gamma {}, zeta {}, xi {}, W {}",
                n,
                zeta.len(),
                xi.len(),
                w.len()
            )));
        }
        let h = match &pre_map {
            Some(p) => {
                if p.m.nrows() != d_in || p.b.shape() != (1, p.m.ncols()) {
                    return Err(Error::Shape(format!(
                        "pre-map is {}x{} with bias {:?}, input width {d_in}",
                        p.m.nrows(),
                        p.m.ncols(),
                        p.b.shape()
                    )));
                }
                p.m.ncols()
            }
            None => d_in,
        };
        let c = w[0].ncols();
        for (k, wk) in w.iter().enumerate() {
            if wk.shape() != (h, c) {
                return Err(Error::Shape(format!(
                    "layer {k}: W is {}x{}, expected {h}x{c}",
                    wk.nrows(),
                    wk.ncols()
                )));
            }
        }
        if h != c {
            return Err(Error::Shape(format!(
                "identity branch needs propagated width {h} to equal class count {c}; add a pre-map to {c}"
            )));
        }
        Ok(Self {
            gamma,
            zeta,
            xi: if tie_xi { Vec::new() } else { xi },
            w,
            pre_map,
            tie_xi,
            generation: 0,
        })
    }

    /// Training initialization: `γ_k = α₀(1−α₀)^k` (last `(1−α₀)^K`),
    /// `ζ = 1` with tied `ξ = 0`, Glorot `W`, and a Glorot pre-map to `C`
    /// columns when `d_in ≠ C`.
    pub fn init<R: Rng + ?Sized>(
        d_in: usize,
        num_classes: usize,
        k: usize,
        alpha0: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let gamma = crate::spectral::appnp_exact_expansion(k, alpha0)?;
        let pre_map = (d_in != num_classes).then(|| PreMap {
            m: glorot_uniform(rng, d_in, num_classes),
            b: Matrix::zeros(1, num_classes),
        });
        let w = (0..=k)
            .map(|_| glorot_uniform(rng, num_classes, num_classes))
            .collect();
        Self::new(gamma, vec![1.0; k + 1], Vec::new(), w, pre_map, true, d_in)
    }

    pub fn k(&self) -> usize {
        self.gamma.len() - 1
    }

    pub fn d_in(&self) -> usize {
        match &self.pre_map {
            Some(p) => p.m.nrows(),
            None => self.w[0].nrows(),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.w[0].ncols()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn xi_at(&self, k: usize) -> f64 {
        if self.tie_xi {
            1.0 - self.zeta[k]
        } else {
            self.xi[k]
        }
    }

    pub fn num_params(&self) -> usize {
        let scalars = self.gamma.len() * if self.tie_xi { 2 } else { 3 };
        let weights: usize = self.w.iter().map(|m| m.len()).sum();
        let pre = self.pre_map.as_ref().map_or(0, |p| p.m.len() + p.b.len());
        scalars + weights + pre
    }

    /// Flat layout: γ, ζ, ξ (untied only), each `W` column-major, `M`, `b`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        out.extend_from_slice(&self.gamma);
        out.extend_from_slice(&self.zeta);
        if !self.tie_xi {
            out.extend_from_slice(&self.xi);
        }
        for m in &self.w {
            out.extend_from_slice(m.as_slice());
        }
        if let Some(p) = &self.pre_map {
            out.extend_from_slice(p.m.as_slice());
            out.extend_from_slice(p.b.as_slice());
        }
        out
    }

    /// Overwrites every parameter from the flat layout and bumps the generation.
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "flat vector has {} entries, model has {}",
                flat.len(),
                self.num_params()
            )));
        }
        let mut it = flat.iter().copied();
        let mut fill = |dst: &mut [f64]| dst.iter_mut().for_each(|v| *v = it.next().expect("length checked"));
        fill(&mut self.gamma);
        fill(&mut self.zeta);
        if !self.tie_xi {
            fill(&mut self.xi);
        }
        for m in &mut self.w {
            fill(m.as_mut_slice());
        }
        if let Some(p) = &mut self.pre_map {
            fill(p.m.as_mut_slice());
            fill(p.b.as_mut_slice());
        }
        self.generation += 1;
        Ok(())
    }

    /// Flat mask of entries that receive weight decay (`W` and `M`).
    pub fn decay_mask(&self) -> Vec<bool> {
        let scalars = self.gamma.len() * if self.tie_xi { 2 } else { 3 };
        let mut mask = vec![false; scalars];
        for m in &self.w {
            mask.extend(std::iter::repeat_n(true, m.len()));
        }
        if let Some(p) = &self.pre_map {
            mask.extend(std::iter::repeat_n(true, p.m.len()));
            mask.extend(std::iter::repeat_n(false, p.b.len()));
        }
        mask
    }
}

/// `Â^k X` and `Â^k 1` for `k = 0..=K`.
#[derive(Debug, Clone)]
pub struct PropagationBase {
    pub q: Vec<Matrix>,
    pub r: Vec<DVector<f64>>,
}

impl PropagationBase {
    pub fn new(ops: &NormalizedOperators, x: &Signal, k: usize) -> Result<Self> {
        let mut q = Vec::with_capacity(k + 1);
        let mut r = Vec::with_capacity(k + 1);
        q.push(x.clone());
        r.push(DVector::from_element(x.nrows(), 1.0));
        for i in 0..k {
            let next_q = ops.spmm(&q[i])?;
            let next_r = ops.spmm(&Matrix::from_column_slice(x.nrows(), 1, r[i].as_slice()))?;
            q.push(next_q);
            r.push(DVector::from_column_slice(next_r.as_slice()));
        }
        Ok(Self { q, r })
    }

    pub fn k(&self) -> usize {
        self.q.len() - 1
    }
}

#[derive(Debug, Clone)]
pub struct ForwardCache {
    generation: u64,
    /// `P_k = Â^k p_pre(X)`.
    pub p: Vec<Matrix>,
    pub logits: Matrix,
}

impl ForwardCache {
    pub fn generation(&self) -> u64 {
        self.generation
    }
}

pub fn forward_logits(params: &UgdgnnParams, base: &PropagationBase) -> Result<ForwardCache> {
    if base.k() != params.k() {
        return Err(Error::Shape(format!(
            "propagation base has K={}, model has K={}",
            base.k(),
            params.k()
        )));
    }
    if base.q[0].ncols() != params.d_in() {
        return Err(Error::Shape(format!(
            "input has {} columns, model expects {}",
            base.q[0].ncols(),
            params.d_in()
        )));
    }
    let p: Vec<Matrix> = match &params.pre_map {
        None => base.q.clone(),
        Some(pre) => base
            .q
            .iter()
            .zip(&base.r)
            .map(|(q, r)| q * &pre.m + r * &pre.b)
            .collect(),
    };
    let n = base.q[0].nrows();
    let mut logits = Matrix::zeros(n, params.num_classes());
    for (k, pk) in p.iter().enumerate() {
        let g = params.gamma[k];
        if g == 0.0 {
            continue;
        }
        if params.zeta[k] != 0.0 {
            logits += pk * (g * params.zeta[k]);
        }
        let xi = params.xi_at(k);
        if xi != 0.0 {
            logits += (pk * &params.w[k]) * (g * xi);
        }
    }
    Ok(ForwardCache {
        generation: params.generation,
        p,
        logits,
    })
}

/// Gradients in the same structure as [`UgdgnnParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub gamma: Vec<f64>,
    pub zeta: Vec<f64>,
    pub xi: Vec<f64>,
    pub w: Vec<Matrix>,
    pub pre_m: Option<Matrix>,
    pub pre_b: Option<Matrix>,
}

impl Gradients {
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.gamma);
        out.extend_from_slice(&self.zeta);
        out.extend_from_slice(&self.xi);
        for m in &self.w {
            out.extend_from_slice(m.as_slice());
        }
        if let Some(m) = &self.pre_m {
            out.extend_from_slice(m.as_slice());
        }
        if let Some(b) = &self.pre_b {
            out.extend_from_slice(b.as_slice());
        }
        out
    }
}

/// Reverse pass given `G = ∂loss/∂logits`.
pub fn backward(
    params: &UgdgnnParams,
    base: &PropagationBase,
    cache: &ForwardCache,
    grad_logits: &Matrix,
) -> Result<Gradients> {
    if cache.generation != params.generation {
        return Err(Error::StaleCache {
            cache: cache.generation,
            params: params.generation,
        });
    }
    if grad_logits.shape() != cache.logits.shape() {
        return Err(Error::Shape(format!(
            "logit gradient is {:?}, logits are {:?}",
            grad_logits.shape(),
            cache.logits.shape()
        )));
    }
    let g = grad_logits;
    let n_layers = params.gamma.len();
    let mut d_gamma = vec![0.0; n_layers];
    let mut d_zeta = vec![0.0; n_layers];
    let mut d_xi = if params.tie_xi { Vec::new() } else { vec![0.0; n_layers] };
    let mut d_w = Vec::with_capacity(n_layers);
    let h = params.w[0].nrows();
    let mut d_pre_m = params.pre_map.as_ref().map(|p| Matrix::zeros(p.m.nrows(), h));
    let mut d_pre_b = params.pre_map.as_ref().map(|_| Matrix::zeros(1, h));
    for k in 0..n_layers {
        let pk = &cache.p[k];
        let wk = &params.w[k];
        let (gk, zk, xk) = (params.gamma[k], params.zeta[k], params.xi_at(k));
        let pk_g = inner(pk, g);
        let pw_g = inner(&(pk * wk), g);
        d_gamma[k] = zk * pk_g + xk * pw_g;
        if params.tie_xi {
            d_zeta[k] = gk * (pk_g - pw_g);
        } else {
            d_zeta[k] = gk * pk_g;
            d_xi[k] = gk * pw_g;
        }
        d_w.push(pk.transpose() * g * (gk * xk));
        if let (Some(dm), Some(db)) = (d_pre_m.as_mut(), d_pre_b.as_mut()) {
            // ∂/∂P_k = γ_k G (ζ_k I + ξ_k W_k)ᵀ
            let mut d_p = g * (gk * zk);
            if xk != 0.0 {
                d_p += g * wk.transpose() * (gk * xk);
            }
            *dm += base.q[k].transpose() * &d_p;
            *db += base.r[k].transpose() * &d_p;
        }
    }
    Ok(Gradients {
        gamma: d_gamma,
        zeta: d_zeta,
        xi: d_xi,
        w: d_w,
        pre_m: d_pre_m,
        pre_b: d_pre_b,
    })
}

/// Row softmax with per-row max subtraction.
pub fn softmax_rows(z: &Matrix) -> Matrix {
    let mut out = z.clone();
    for mut row in out.row_iter_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.iter_mut().for_each(|v| *v = (*v - max).exp());
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= sum);
    }
    out
}

/// Mean `−log p[label]` over masked rows and its gradient with respect to the
/// logits that produced `probs`.
pub fn cross_entropy_masked(probs: &Matrix, labels: &[usize], mask: &[bool]) -> Result<(f64, Matrix)> {
    let n = probs.nrows();
    if labels.len() != n || mask.len() != n {
        return Err(Error::Shape(format!(
            "{n} rows but {} labels and {} mask entries",
            labels.len(),
            mask.len()
        )));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    let scale = 1.0 / count as f64;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(n, probs.ncols());
    for i in (0..n).filter(|&i| mask[i]) {
        let y = labels[i];
        if y >= probs.ncols() {
            return Err(Error::Dataset(format!("label {y} out of range for {} classes", probs.ncols())));
        }
        loss -= probs[(i, y)].ln();
        for c in 0..probs.ncols() {
            grad[(i, c)] = probs[(i, c)] * scale;
        }
        grad[(i, y)] -= scale;
    }
    Ok((loss * scale, grad))
}

/// Row argmax; ties resolve to the lowest class index.
pub fn predict(logits: &Matrix) -> Vec<usize> {
    logits
        .row_iter()
        .map(|row| {
            let mut best = 0;
            for c in 1..row.len() {
                if row[c] > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

pub fn accuracy(pred: &[usize], labels: &[usize], mask: &[bool]) -> Result<f64> {
    let total = mask.iter().filter(|&&m| m).count();
    if total == 0 {
        return Err(Error::EmptyMask);
    }
    let hits = (0..labels.len())
        .filter(|&i| mask[i] && pred[i] == labels[i])
        .count();
    Ok(hits as f64 / total as f64)
}
