#![allow(dead_code)]

use gsd_unroll::graph::erdos_renyi;
use gsd_unroll::gsd::{GsdSpec, Regularizer};
use gsd_unroll::trainer::{
    backward, cross_entropy_masked, forward_logits, softmax_rows, PreMap, PropagationBase, UgdgnnParams,
};
use gsd_unroll::{add_self_loops, normalize, Graph, Matrix, NormalizedOperators};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize, lo: f64, hi: f64) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.random_range(lo..hi))
}

pub fn random_sym(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    let m = normal(rng, d, d);
    (&m + m.transpose()) * 0.5
}

/// Symmetric positive definite with eigenvalues in roughly `[0.2, 1.2]`.
pub fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    let m = uniform(rng, d, d, -0.4, 0.4);
    &m * m.transpose() / (d as f64) + Matrix::identity(d, d) * 0.2
}

/// Self-looped Erdős–Rényi graph.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> (Graph, NormalizedOperators) {
    let g = add_self_loops(&erdos_renyi(n, p, rng).unwrap());
    let ops = normalize(&g).unwrap();
    (g, ops)
}

/// `D^{-1/2} A D^{-1/2}` computed densely from the edge list.
pub fn dense_a_hat(g: &Graph) -> Matrix {
    let n = g.num_nodes();
    let mut a = Matrix::zeros(n, n);
    for &(u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let deg: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    Matrix::from_fn(n, n, |i, j| a[(i, j)] / (deg[i] * deg[j]).sqrt())
}

/// Normalized incidence matrix over non-loop edges, `+` at the smaller index.
pub fn dense_b_hat(g: &Graph) -> Matrix {
    let n = g.num_nodes();
    let mut deg = vec![0.0; n];
    for &(u, v) in g.edges() {
        deg[u] += 1.0;
        if u != v {
            deg[v] += 1.0;
        }
    }
    let edges: Vec<(usize, usize)> = g.non_loop_edges().collect();
    let mut b = Matrix::zeros(edges.len(), n);
    for (e, &(u, v)) in edges.iter().enumerate() {
        let (lo, hi) = (u.min(v), u.max(v));
        b[(e, lo)] = 1.0 / f64::sqrt(deg[lo]);
        b[(e, hi)] = -1.0 / f64::sqrt(deg[hi]);
    }
    b
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

/// Multinomial logistic regression (with bias and a small L2 penalty) fitted
/// by full-batch gradient descent from zero on the `train` rows; returns the
/// accuracy on the `eval` rows.
pub fn logistic_regression_accuracy(
    features: &Matrix,
    labels: &[usize],
    classes: usize,
    train: &[bool],
    eval: &[bool],
) -> f64 {
    let n = features.nrows();
    let d = features.ncols();
    let mut w = Matrix::zeros(d + 1, classes);
    let aug = Matrix::from_fn(n, d + 1, |i, j| if j < d { features[(i, j)] } else { 1.0 });
    let rows: Vec<usize> = (0..n).filter(|&i| train[i]).collect();
    let lambda = 1e-3;
    for _ in 0..5000 {
        let mut grad = Matrix::zeros(d + 1, classes);
        for &i in &rows {
            let z = aug.row(i) * &w;
            let max = z.max();
            let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
            let s: f64 = e.iter().sum();
            for c in 0..classes {
                let coeff = e[c] / s - if labels[i] == c { 1.0 } else { 0.0 };
                for j in 0..=d {
                    grad[(j, c)] += coeff * aug[(i, j)] / rows.len() as f64;
                }
            }
        }
        grad += &w * lambda;
        w -= grad * 0.5;
    }
    let scores = aug * w;
    let mut hits = 0;
    let mut total = 0;
    for i in (0..n).filter(|&i| eval[i]) {
        let row = scores.row(i);
        let mut best = 0;
        for c in 1..classes {
            if row[c] > row[best] {
                best = c;
            }
        }
        total += 1;
        hits += usize::from(best == labels[i]);
    }
    hits as f64 / total as f64
}

pub fn random_spec(r: &mut ChaCha8Rng, d: usize, reg: Regularizer) -> GsdSpec {
    let alpha = r.random_range(0.05..1.0);
    let beta = r.random_range(0.05..1.0);
    GsdSpec::new(alpha, beta, random_sym(r, d), random_sym(r, d), reg).unwrap()
}

/// Brute-force minimizer of `(1−β)‖y − x‖ + β‖y − v‖²` over a grid, then a
/// shrinking compass search.
pub fn numeric_prox(v: [f64; 2], x: [f64; 2], beta: f64) -> [f64; 2] {
    let f = |y: [f64; 2]| {
        let a = ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2)).sqrt();
        let b = (y[0] - v[0]).powi(2) + (y[1] - v[1]).powi(2);
        (1.0 - beta) * a + beta * b
    };
    let lo = [v[0].min(x[0]) - 1.0, v[1].min(x[1]) - 1.0];
    let hi = [v[0].max(x[0]) + 1.0, v[1].max(x[1]) + 1.0];
    let steps = 400;
    let mut best = x;
    for i in 0..=steps {
        for j in 0..=steps {
            let y = [
                lo[0] + (hi[0] - lo[0]) * i as f64 / steps as f64,
                lo[1] + (hi[1] - lo[1]) * j as f64 / steps as f64,
            ];
            if f(y) < f(best) {
                best = y;
            }
        }
    }
    if f(v) < f(best) {
        best = v;
    }
    let mut h = (hi[0] - lo[0]).max(hi[1] - lo[1]) / steps as f64;
    while h > 1e-12 {
        let mut moved = false;
        for dir in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]] {
            let y = [best[0] + h * dir[0], best[1] + h * dir[1]];
            if f(y) < f(best) {
                best = y;
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    best
}

pub fn masked_loss(logits: &Matrix, labels: &[usize], mask: &[bool]) -> f64 {
    cross_entropy_masked(&softmax_rows(logits), labels, mask).unwrap().0
}

pub fn random_params(r: &mut ChaCha8Rng, d_in: usize, c: usize, k: usize, tie: bool, pre: bool) -> UgdgnnParams {
    let h = if pre { c } else { d_in };
    let pre_map = pre.then(|| PreMap {
        m: normal(r, d_in, h),
        b: normal(r, 1, h),
    });
    UgdgnnParams::new(
        (0..=k).map(|_| r.random_range(-1.0..1.0)).collect(),
        (0..=k).map(|_| r.random_range(-1.0..1.0)).collect(),
        (0..=k).map(|_| r.random_range(-1.0..1.0)).collect(),
        (0..=k).map(|_| normal(r, h, c) * 0.5).collect(),
        pre_map,
        tie,
        d_in,
    )
    .unwrap()
}

/// Worst per-entry error between `backward` and central differences of the
/// masked loss (`h = 1e-6`), relative with a 1e-4 floor on the magnitude.
pub fn gradient_check(seed: u64, tie: bool, pre: bool) -> f64 {
    let mut r = rng(seed);
    let n = 5;
    let c = 2;
    let d_in = if pre { 3 } else { c };
    let k = r.random_range(0..=4);
    let (_, ops) = random_graph(&mut r, n, 0.5);
    let x = normal(&mut r, n, d_in);
    let labels: Vec<usize> = (0..n).map(|i| i % c).collect();
    let mask = vec![true, true, false, true, true];
    let params = random_params(&mut r, d_in, c, k, tie, pre);
    let base = PropagationBase::new(&ops, &x, k).unwrap();
    let cache = forward_logits(&params, &base).unwrap();
    let (_, g) = cross_entropy_masked(&softmax_rows(&cache.logits), &labels, &mask).unwrap();
    let analytic = backward(&params, &base, &cache, &g).unwrap().to_flat();
    let flat = params.to_flat();
    assert_eq!(analytic.len(), flat.len());
    let loss_at = |v: &[f64]| {
        let mut p = params.clone();
        p.set_flat(v).unwrap();
        masked_loss(&forward_logits(&p, &base).unwrap().logits, &labels, &mask)
    };
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..flat.len() {
        let mut up = flat.clone();
        let mut dn = flat.clone();
        up[i] += h;
        dn[i] -= h;
        let fd = (loss_at(&up) - loss_at(&dn)) / (2.0 * h);
        let err = (fd - analytic[i]).abs() / fd.abs().max(analytic[i].abs()).max(1e-4);
        worst = worst.max(err);
    }
    worst
}
