//! Native parameterizations of the propagation schemes and their literal
//! forward passes.

use serde::{Deserialize, Serialize};

use crate::gsd::closed_form_ppnp;
use crate::linalg::relu;
use crate::solvers::row_shrink;
use crate::{Error, Matrix, NormalizedOperators, Result, Signal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    /// `Â^K X W`.
    Sgc {
        #[serde(rename = "K")]
        k: usize,
        #[serde(with = "crate::serde_matrix")]
        w: Matrix,
    },
    /// `γ(I − (1−γ)Â)^{-1} X`.
    Ppnp { gamma: f64 },
    /// `H ← (1−γ)ÂH + γX`, `K` times from `H = X`.
    Appnp {
        #[serde(rename = "K")]
        k: usize,
        gamma: f64,
    },
    /// `Σ_{k=0}^{K} Â^k X W^{(k)}`.
    Jknet {
        #[serde(rename = "K")]
        k: usize,
        #[serde(with = "crate::serde_matrix::vec")]
        w: Vec<Matrix>,
    },
    /// `Σ_{k=0}^{K} γ^{(k)} Â^k X`.
    Gprgnn {
        #[serde(rename = "K")]
        k: usize,
        gamma: Vec<f64>,
    },
    /// `H ← ReLU(ÂHW^{(k)})`, `k = 1..K`.
    Gcn {
        #[serde(rename = "K")]
        k: usize,
        #[serde(with = "crate::serde_matrix::vec")]
        w: Vec<Matrix>,
    },
    /// `H ← ReLU((ζÂH + (1−ζ)X)(ξW^{(k)} + (1−ξ)I))`, `k = 1..K`.
    Gcnii {
        #[serde(rename = "K")]
        k: usize,
        zeta: f64,
        xi: f64,
        #[serde(with = "crate::serde_matrix::vec")]
        w: Vec<Matrix>,
    },
    /// Row shrinkage of `ÂH` toward `X` with threshold `(1−γ)/(2γ)`.
    Airgnn {
        #[serde(rename = "K")]
        k: usize,
        gamma: f64,
    },
    /// `Σ_{k=0}^{K} γ^{(k)} Â^k X (ζ^{(k)} I + ξ^{(k)} W^{(k)})`.
    Ugdgnn(Ugdgnn),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ugdgnn {
    #[serde(rename = "K")]
    pub k: usize,
    pub gamma: Vec<f64>,
    pub zeta: Vec<f64>,
    /// Ignored when `tie_xi` is set (then `ξ = 1 − ζ`).
    #[serde(default)]
    pub xi: Vec<f64>,
    /// `None` where the `W` branch is inactive.
    #[serde(default, with = "crate::serde_matrix::vec_opt")]
    pub w: Vec<Option<Matrix>>,
    #[serde(default)]
    pub tie_xi: bool,
}

impl Ugdgnn {
    /// Pure generalized-PageRank form: `ζ = 1`, `ξ = 0`, no weights.
    pub fn gpr(gamma: Vec<f64>) -> Self {
        let k = gamma.len().saturating_sub(1);
        Self {
            k,
            zeta: vec![1.0; gamma.len()],
            xi: vec![0.0; gamma.len()],
            w: vec![None; gamma.len()],
            gamma,
            tie_xi: false,
        }
    }

    pub fn xi_at(&self, k: usize) -> f64 {
        if self.tie_xi {
            1.0 - self.zeta[k]
        } else {
            self.xi[k]
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.k + 1;
        if self.gamma.len() != n || self.zeta.len() != n {
            return Err(Error::InvalidParameter(format!(
                "ugdgnn with K={} needs {n} gamma and zeta values, got {} and {}",
                self.k,
                self.gamma.len(),
                self.zeta.len()
            )));
        }
        if !self.tie_xi && self.xi.len() != n {
            return Err(Error::InvalidParameter(format!(
                "ugdgnn with K={} needs {n} xi values (or tie_xi), got {}",
                self.k,
                self.xi.len()
            )));
        }
        if !self.w.is_empty() && self.w.len() != n {
            return Err(Error::InvalidParameter(format!(
                "ugdgnn with K={} needs {n} weight slots, got {}",
                self.k,
                self.w.len()
            )));
        }
        Ok(())
    }

    fn weight(&self, k: usize) -> Option<&Matrix> {
        self.w.get(k).and_then(Option::as_ref)
    }
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sgc { .. } => "sgc",
            Self::Ppnp { .. } => "ppnp",
            Self::Appnp { .. } => "appnp",
            Self::Jknet { .. } => "jknet",
            Self::Gprgnn { .. } => "gprgnn",
            Self::Gcn { .. } => "gcn",
            Self::Gcnii { .. } => "gcnii",
            Self::Airgnn { .. } => "airgnn",
            Self::Ugdgnn(_) => "ugdgnn",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let need_k = |k: usize| {
            if k == 0 {
                Err(Error::InvalidParameter(format!(
                    "{} needs K >= 1",
                    self.name()
                )))
            } else {
                Ok(())
            }
        };
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{}: {name} must lie in [0, 1], got {v}",
                    self.name()
                )))
            }
        };
        let count = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{}: expected {want} {what}, got {got}",
                    self.name()
                )))
            }
        };
        match self {
            Self::Sgc { k, .. } => need_k(*k),
            Self::Ppnp { gamma } => {
                if *gamma > 0.0 && *gamma <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "ppnp: gamma must lie in (0, 1], got {gamma}"
                    )))
                }
            }
            Self::Appnp { k, gamma } => {
                need_k(*k)?;
                unit("gamma", *gamma)
            }
            Self::Jknet { k, w } => {
                need_k(*k)?;
                count("weight matrices", w.len(), k + 1)
            }
            Self::Gprgnn { k, gamma } => {
                need_k(*k)?;
                count("gamma values", gamma.len(), k + 1)
            }
            Self::Gcn { k, w } => {
                need_k(*k)?;
                count("weight matrices", w.len(), *k)
            }
            Self::Gcnii { k, zeta, xi, w } => {
                need_k(*k)?;
                unit("zeta", *zeta)?;
                unit("xi", *xi)?;
                count("weight matrices", w.len(), *k)
            }
            Self::Airgnn { k, gamma } => {
                need_k(*k)?;
                if *gamma > 0.0 && *gamma < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "airgnn: gamma must lie in (0, 1), got {gamma}"
                    )))
                }
            }
            Self::Ugdgnn(u) => u.validate(),
        }
    }
}

fn check_rows(x: &Signal, ops: &NormalizedOperators) -> Result<()> {
    if x.nrows() != ops.num_nodes() {
        return Err(Error::Shape(format!(
            "signal has {} rows, graph has {} nodes",
            x.nrows(),
            ops.num_nodes()
        )));
    }
    Ok(())
}

fn check_mul(layer: usize, h_cols: usize, w: &Matrix) -> Result<()> {
    if w.nrows() != h_cols {
        return Err(Error::Shape(format!(
            "layer {layer}: weight is {}x{}, input has {h_cols} columns",
            w.nrows(),
            w.ncols()
        )));
    }
    Ok(())
}

/// Literal GCNII recursion from `H^{(0)} = h0`; `activate = false` drops the ReLU.
pub(crate) fn gcnii_propagate(
    ops: &NormalizedOperators,
    x: &Signal,
    h0: Signal,
    zeta: f64,
    xi: f64,
    w: &[Matrix],
    activate: bool,
) -> Result<Signal> {
    let d = x.ncols();
    let mut h = h0;
    for (i, wk) in w.iter().enumerate() {
        if wk.shape() != (d, d) {
            return Err(Error::Shape(format!(
                "layer {}: GCNII weight must be {d}x{d}, got {}x{}",
                i + 1,
                wk.nrows(),
                wk.ncols()
            )));
        }
        let t = wk * xi + Matrix::identity(d, d) * (1.0 - xi);
        let mixed = ops.spmm(&h)? * zeta + x * (1.0 - zeta);
        h = mixed * t;
        if activate {
            h = relu(&h);
        }
    }
    Ok(h)
}

/// Direct evaluation of each model's propagation formula.
pub fn forward(model: &ModelSpec, ops: &NormalizedOperators, x: &Signal) -> Result<Signal> {
    model.validate()?;
    check_rows(x, ops)?;
    match model {
        ModelSpec::Sgc { k, w } => {
            check_mul(*k, x.ncols(), w)?;
            Ok(ops.power_apply(x, *k)? * w)
        }
        ModelSpec::Ppnp { gamma } => closed_form_ppnp(ops, x, *gamma),
        ModelSpec::Appnp { k, gamma } => {
            let mut h = x.clone();
            for _ in 0..*k {
                h = ops.spmm(&h)? * (1.0 - gamma) + x * *gamma;
            }
            Ok(h)
        }
        ModelSpec::Jknet { w, .. } => {
            let out_cols = w[0].ncols();
            let mut p = x.clone();
            let mut out = Matrix::zeros(x.nrows(), out_cols);
            for (i, wk) in w.iter().enumerate() {
                check_mul(i, x.ncols(), wk)?;
                if wk.ncols() != out_cols {
                    return Err(Error::Shape(format!(
                        "layer {i}: weight has {} columns, expected {out_cols}",
                        wk.ncols()
                    )));
                }
                if i > 0 {
                    p = ops.spmm(&p)?;
                }
                out += &p * wk;
            }
            Ok(out)
        }
        ModelSpec::Gprgnn { gamma, .. } => {
            let mut p = x.clone();
            let mut out = x * gamma[0];
            for &g in &gamma[1..] {
                p = ops.spmm(&p)?;
                out += &p * g;
            }
            Ok(out)
        }
        ModelSpec::Gcn { w, .. } => {
            let mut h = x.clone();
            for (i, wk) in w.iter().enumerate() {
                check_mul(i + 1, h.ncols(), wk)?;
                h = relu(&(ops.spmm(&h)? * wk));
            }
            Ok(h)
        }
        ModelSpec::Gcnii { zeta, xi, w, .. } => {
            gcnii_propagate(ops, x, x.clone(), *zeta, *xi, w, true)
        }
        ModelSpec::Airgnn { k, gamma } => {
            let threshold = (1.0 - gamma) / (2.0 * gamma);
            let mut h = x.clone();
            for _ in 0..*k {
                h = row_shrink(&ops.spmm(&h)?, x, threshold)?;
            }
            Ok(h)
        }
        ModelSpec::Ugdgnn(u) => ugdgnn_forward(u, ops, x),
    }
}

fn ugdgnn_forward(u: &Ugdgnn, ops: &NormalizedOperators, x: &Signal) -> Result<Signal> {
    let d = x.ncols();
    let active_w = |k: usize| u.xi_at(k) != 0.0 && u.gamma[k] != 0.0;
    let mut out_cols = None;
    for k in 0..=u.k {
        if active_w(k) {
            let w = u.weight(k).ok_or_else(|| {
                Error::InvalidParameter(format!("layer {k}: xi is nonzero but W is missing"))
            })?;
            check_mul(k, d, w)?;
            match out_cols {
                None => out_cols = Some(w.ncols()),
                Some(c) if c != w.ncols() => {
                    return Err(Error::Shape(format!(
                        "layer {k}: weight has {} columns, expected {c}",
                        w.ncols()
                    )))
                }
                _ => {}
            }
        }
    }
    let out_cols = out_cols.unwrap_or(d);
    for k in 0..=u.k {
        if u.zeta[k] != 0.0 && u.gamma[k] != 0.0 && out_cols != d {
            return Err(Error::Shape(format!(
                "layer {k}: identity branch needs output width {d}, weights give {out_cols}"
            )));
        }
    }
    let mut p = x.clone();
    let mut out = Matrix::zeros(x.nrows(), out_cols);
    for k in 0..=u.k {
        if k > 0 {
            p = ops.spmm(&p)?;
        }
        let g = u.gamma[k];
        if g == 0.0 {
            continue;
        }
        if u.zeta[k] != 0.0 {
            out += &p * (g * u.zeta[k]);
        }
        if active_w(k) {
            let w = u.weight(k).expect("checked above");
            out += (&p * w) * (g * u.xi_at(k));
        }
    }
    Ok(out)
}
