//! Forward-vs-unrolled equivalence harness and its random instance family.
//!
//! Random graphs are Erdős–Rényi with `|V| ∈ [10, 50]`, edge probability
//! 0.2 and self-loops added; signals are standard normal with `d ∈ [1, 4]`;
//! depths are `K ∈ [1, 6]`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::erdos_renyi;
use crate::gsd::closed_form_ppnp;
use crate::linalg::max_abs_diff;
use crate::unrolled::layer::run_unrolled;
use crate::unrolled::models::{forward, ModelSpec};
use crate::unrolled::reparam::jknet_weights_from_layers;
use crate::unrolled::to_unroll_plan;
use crate::{add_self_loops, normalize, Error, Graph, Matrix, NormalizedOperators, Result, Signal};

pub const ER_MIN_NODES: usize = 10;
pub const ER_MAX_NODES: usize = 50;
pub const ER_EDGE_PROB: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Sgc,
    Ppnp,
    Appnp,
    Jknet,
    Gprgnn,
    Gcn,
    Gcnii,
    Airgnn,
}

impl ModelKind {
    /// The seven schemes with a layer-by-layer unrolled parameterization.
    pub const UNROLLABLE: [ModelKind; 7] = [
        Self::Sgc,
        Self::Appnp,
        Self::Jknet,
        Self::Gprgnn,
        Self::Gcn,
        Self::Gcnii,
        Self::Airgnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sgc => "sgc",
            Self::Ppnp => "ppnp",
            Self::Appnp => "appnp",
            Self::Jknet => "jknet",
            Self::Gprgnn => "gprgnn",
            Self::Gcn => "gcn",
            Self::Gcnii => "gcnii",
            Self::Airgnn => "airgnn",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sgc" => Self::Sgc,
            "ppnp" => Self::Ppnp,
            "appnp" => Self::Appnp,
            "jknet" => Self::Jknet,
            "gprgnn" => Self::Gprgnn,
            "gcn" => Self::Gcn,
            "gcnii" => Self::Gcnii,
            "airgnn" => Self::Airgnn,
            other => return Err(Error::InvalidParameter(format!("unknown model `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub model: String,
    pub max_abs_diff: f64,
    pub pass: bool,
    pub tol: f64,
}

/// Horizon used when comparing PPNP with APPNP: at least 400 layers and
/// enough that `(1−γ)^K < 1e-14`.
pub fn ppnp_horizon(gamma: f64) -> usize {
    if gamma >= 1.0 {
        return 1;
    }
    let needed = ((1e-14f64).ln() / (1.0 - gamma).ln()).ceil();
    (needed as usize).clamp(400, 1_000_000)
}

/// `‖forward − run_unrolled(to_unroll_plan)‖_∞`; PPNP is compared with APPNP
/// at [`ppnp_horizon`] instead.
pub fn equivalence_check(
    model: &ModelSpec,
    ops: &NormalizedOperators,
    x: &Signal,
    tol: f64,
) -> Result<EquivalenceReport> {
    let direct = forward(model, ops, x)?;
    let other = match model {
        ModelSpec::Ppnp { gamma } => forward(
            &ModelSpec::Appnp {
                k: ppnp_horizon(*gamma),
                gamma: *gamma,
            },
            ops,
            x,
        )?,
        ModelSpec::Ugdgnn(_) => {
            return Err(Error::InvalidParameter(
                "ugdgnn has no separate unrolled path to compare against".into(),
            ))
        }
        _ => run_unrolled(&to_unroll_plan(model, x.ncols())?, ops, x)?,
    };
    let diff = max_abs_diff(&direct, &other);
    Ok(EquivalenceReport {
        model: model.name().to_string(),
        max_abs_diff: diff,
        pass: diff < tol,
        tol,
    })
}

/// PPNP closed form against APPNP at depth `k`.
pub fn ppnp_appnp_gap(ops: &NormalizedOperators, x: &Signal, gamma: f64, k: usize) -> Result<f64> {
    let closed = closed_form_ppnp(ops, x, gamma)?;
    let appnp = forward(&ModelSpec::Appnp { k, gamma }, ops, x)?;
    Ok(max_abs_diff(&closed, &appnp))
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub ops: NormalizedOperators,
    pub x: Signal,
    pub model: ModelSpec,
}

fn normal_matrix<R: Rng + ?Sized>(rng: &mut R, r: usize, c: usize, scale: f64) -> Matrix {
    Matrix::from_fn(r, c, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Standard normal `n × d` signal.
pub fn random_signal<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Signal {
    normal_matrix(rng, n, d, 1.0)
}

fn uniform_matrix<R: Rng + ?Sized>(rng: &mut R, r: usize, c: usize, half_width: f64) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.random_range(-half_width..half_width))
}

/// Self-looped Erdős–Rényi graph with `|V|` drawn uniformly from `[lo, hi]`.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, lo: usize, hi: usize, p: f64) -> Result<Graph> {
    let n = rng.random_range(lo..=hi);
    Ok(add_self_loops(&erdos_renyi(n, p, rng)?))
}

/// Random valid parameters of the given scheme for input width `d`.
pub fn random_model<R: Rng + ?Sized>(kind: ModelKind, d: usize, rng: &mut R) -> ModelSpec {
    let k = rng.random_range(1..=6usize);
    let scale = 1.0 / (d as f64).sqrt();
    match kind {
        ModelKind::Sgc => {
            let out = rng.random_range(1..=4usize);
            ModelSpec::Sgc {
                k,
                w: normal_matrix(rng, d, out, scale),
            }
        }
        ModelKind::Ppnp => ModelSpec::Ppnp {
            gamma: rng.random_range(0.05..1.0),
        },
        ModelKind::Appnp => ModelSpec::Appnp {
            k,
            gamma: rng.random_range(0.0..=1.0),
        },
        ModelKind::Jknet => {
            // sample per-layer T's and an output map, then derive the weights
            let t: Vec<Matrix> = (0..k)
                .map(|_| uniform_matrix(rng, d, d, 0.4) + Matrix::identity(d, d) * 0.3)
                .collect();
            let s = Matrix::identity(d, d) + uniform_matrix(rng, d, d, 0.3);
            let w = jknet_weights_from_layers(&t)
                .expect("square layers")
                .into_iter()
                .map(|m| m * &s)
                .collect();
            ModelSpec::Jknet { k, w }
        }
        ModelKind::Gprgnn => ModelSpec::Gprgnn {
            k,
            gamma: (0..=k).map(|_| rng.random_range(0.0..1.0)).collect(),
        },
        ModelKind::Gcn => ModelSpec::Gcn {
            k,
            w: (0..k).map(|_| normal_matrix(rng, d, d, scale)).collect(),
        },
        ModelKind::Gcnii => ModelSpec::Gcnii {
            k,
            zeta: rng.random_range(0.0..=1.0),
            xi: rng.random_range(0.0..=1.0),
            w: (0..k).map(|_| normal_matrix(rng, d, d, scale)).collect(),
        },
        ModelKind::Airgnn => ModelSpec::Airgnn {
            k,
            gamma: rng.random_range(0.05..0.95),
        },
    }
}

pub fn random_instance<R: Rng + ?Sized>(kind: ModelKind, rng: &mut R) -> Result<Instance> {
    let graph = random_graph(rng, ER_MIN_NODES, ER_MAX_NODES, ER_EDGE_PROB)?;
    let ops = normalize(&graph)?;
    let d = rng.random_range(1..=4usize);
    let x = normal_matrix(rng, graph.num_nodes(), d, 1.0);
    let model = random_model(kind, d, rng);
    Ok(Instance {
        graph,
        ops,
        x,
        model,
    })
}

/// RNG for trial `index` of a batch seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub model: String,
    pub trials: usize,
    pub max_abs_diff: f64,
    pub failures: usize,
    pub pass: bool,
    pub tol: f64,
}

/// Runs `trials` independent random instances in parallel.
pub fn equivalence_batch(kind: ModelKind, trials: usize, seed: u64, tol: f64) -> Result<BatchReport> {
    let diffs = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let inst = random_instance(kind, &mut rng)?;
            Ok(equivalence_check(&inst.model, &inst.ops, &inst.x, tol)?.max_abs_diff)
        })
        .collect::<Result<Vec<f64>>>()?;
    let failures = diffs.iter().filter(|&&d| d.is_nan() || d >= tol).count();
    let max = diffs.iter().copied().fold(0.0, f64::max);
    Ok(BatchReport {
        model: kind.name().to_string(),
        trials,
        max_abs_diff: max,
        failures,
        pass: failures == 0,
        tol,
    })
}
