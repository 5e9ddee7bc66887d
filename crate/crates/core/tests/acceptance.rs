//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line to
//! stderr (bypassing libtest's capture) and then asserts on the same result.

mod common;

use std::io::Write;
use std::time::Instant;

use common::*;
use gsd_unroll::gsd::{gradient_smooth, smooth_objective, Regularizer};
use gsd_unroll::solvers::{gd_run, prox_row_l21, proxgd_run, SolveConfig};
use gsd_unroll::spectral::{
    appnp_exact_expansion, apply_adjacency_series, apply_polynomial_filter, gcnii_filter_weights,
    gcnii_linear_forward, laplacian_eigenvalues, sgc_implied_theta, theta_to_ugdgnn, FilterCoeffs,
};
use gsd_unroll::trainer::{depth_sweep, karate_dataset, sbm_generate, train, SbmConfig, Split, TrainConfig, SWEEP_SEEDS};
use gsd_unroll::unrolled::equivalence::{ppnp_appnp_gap, random_signal};
use gsd_unroll::unrolled::{equivalence_batch, forward, ModelKind, ModelSpec};
use gsd_unroll::{Graph, Matrix};
use rand::Rng;

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "acceptance {id} [{status}] {name}: {detail}");
}

#[test]
fn c1_unrolled_paths_match_direct_forward() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for (i, kind) in ModelKind::UNROLLABLE.into_iter().enumerate() {
        let rep = equivalence_batch(kind, 50, 1000 + i as u64, 1e-9).unwrap();
        worst = worst.max(rep.max_abs_diff);
        failures += rep.failures;
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures == 0 && worst < 1e-9 && secs < 30.0;
    report(1, "model equivalence", pass, format!("7×50 instances, max diff {worst:.3e}, {failures} failures, {secs:.2}s"));
    assert!(pass);
}

#[test]
fn c2_appnp_converges_to_ppnp() {
    let mut r = rng(2000);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (_, ops) = random_graph(&mut r, 30, 0.2);
        let d = r.random_range(1..=4);
        let x = random_signal(&mut r, 30, d);
        worst = worst.max(ppnp_appnp_gap(&ops, &x, 0.1, 400).unwrap());
    }
    let pass = worst < 1e-8;
    report(2, "APPNP(K=400) → PPNP", pass, format!("10 graphs, max gap {worst:.3e}"));
    assert!(pass);
}

#[test]
fn c3_polynomial_filters_are_expressible() {
    let mut r = rng(3000);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = r.random_range(0..=6);
        let n = r.random_range(5..=40);
        let (_, ops) = random_graph(&mut r, n, 0.2);
        let x = normal(&mut r, n, 2);
        let theta = FilterCoeffs::new((0..=k).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
        let u = theta_to_ugdgnn(&theta).unwrap();
        let diff = forward(&ModelSpec::Ugdgnn(u), &ops, &x).unwrap() - apply_polynomial_filter(&theta, &ops, &x).unwrap();
        worst = worst.max(max_abs(&diff));
    }
    let one = theta_to_ugdgnn(&FilterCoeffs::new(vec![1.0]).unwrap()).unwrap().gamma;
    let lap = theta_to_ugdgnn(&FilterCoeffs::new(vec![0.0, 1.0]).unwrap()).unwrap().gamma;
    let spots = one == vec![1.0] && lap == vec![1.0, -1.0];
    let pass = worst < 1e-8 && spots;
    report(3, "θ → UGDGNN", pass, format!("100 filters, max diff {worst:.3e}, spot checks {spots}"));
    assert!(pass);
}

#[test]
fn c4_filter_views_of_sgc_appnp_gcnii() {
    let mut r = rng(4000);
    let (_, ops) = random_graph(&mut r, 20, 0.25);
    let x = normal(&mut r, 20, 3);
    let mut sgc: f64 = 0.0;
    for k in 1..=3 {
        let theta = sgc_implied_theta(k).unwrap();
        let diff = apply_polynomial_filter(&theta, &ops, &x).unwrap() - ops.power_apply(&x, k).unwrap();
        sgc = sgc.max(max_abs(&diff));
    }
    let mut appnp: f64 = 0.0;
    for _ in 0..20 {
        let k = r.random_range(1..=10);
        let gamma = r.random_range(0.0..1.0);
        let c = appnp_exact_expansion(k, gamma).unwrap();
        let diff = apply_adjacency_series(&c, &ops, &x).unwrap() - forward(&ModelSpec::Appnp { k, gamma }, &ops, &x).unwrap();
        appnp = appnp.max(max_abs(&diff));
    }
    let mut gcnii: f64 = 0.0;
    let mut checked = 0;
    while checked < 30 {
        let k = r.random_range(1..=5);
        let theta = FilterCoeffs::new((0..=k).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
        // zero denominators are reported as not expressible and skipped
        let Ok(w) = gcnii_filter_weights(&theta) else {
            continue;
        };
        let diff = gcnii_linear_forward(&w, &ops, &x).unwrap() - apply_polynomial_filter(&theta, &ops, &x).unwrap();
        gcnii = gcnii.max(max_abs(&diff));
        checked += 1;
    }
    let pass = sgc < 1e-10 && appnp < 1e-12 && gcnii < 1e-8;
    report(4, "filter coefficients", pass, format!("SGC {sgc:.3e}, APPNP {appnp:.3e}, GCNII {gcnii:.3e}"));
    assert!(pass);
}

#[test]
fn c5_gradients_match_finite_differences() {
    let mut r = rng(5000);
    let mut gsd: f64 = 0.0;
    for trial in 0..20 {
        let n = r.random_range(3..=8);
        let d = r.random_range(1..=3);
        let (_, ops) = random_graph(&mut r, n, 0.4);
        let reg = match trial % 3 {
            0 => Regularizer::None,
            1 => Regularizer::RidgeComplement { weight: None },
            _ => Regularizer::RidgeComplement { weight: Some(0.4) },
        };
        let spec = random_spec(&mut r, d, reg);
        let h = normal(&mut r, n, d);
        let x = normal(&mut r, n, d);
        let grad = gradient_smooth(&spec, &h, &x, &ops).unwrap();
        let step = 1e-6;
        for i in 0..n {
            for j in 0..d {
                let mut hp = h.clone();
                let mut hm = h.clone();
                hp[(i, j)] += step;
                hm[(i, j)] -= step;
                let fd = (smooth_objective(&spec, &hp, &x, &ops).unwrap() - smooth_objective(&spec, &hm, &x, &ops).unwrap())
                    / (2.0 * step);
                gsd = gsd.max((fd - grad[(i, j)]).abs() / grad[(i, j)].abs().max(1e-3));
            }
        }
    }
    let mut ugd: f64 = 0.0;
    for seed in 0..20 {
        for (tie, pre) in [(false, false), (true, false), (false, true), (true, true)] {
            ugd = ugd.max(gradient_check(5100 + seed, tie, pre));
        }
    }
    let pass = gsd < 1e-5 && ugd < 1e-5;
    report(5, "gradients vs central differences", pass, format!("GSD 20 instances {gsd:.3e}, UGDGNN 80 instances {ugd:.3e}"));
    assert!(pass);
}

#[test]
fn c6_solver_properties() {
    let mut r = rng(6000);
    let mut worst_rise = f64::NEG_INFINITY;
    for i in 0..100 {
        let n = r.random_range(2..=30);
        let d = r.random_range(1..=4);
        let (_, ops) = random_graph(&mut r, n, 0.3);
        let reg = match i % 4 {
            0 => Regularizer::None,
            1 => Regularizer::RidgeComplement { weight: Some(0.5) },
            2 => Regularizer::NonNeg,
            _ => Regularizer::RowL21 { weight: 0.4 },
        };
        let spec = random_spec(&mut r, d, reg);
        let x = normal(&mut r, n, d);
        let h0 = if i % 4 == 2 { x.abs() } else { normal(&mut r, n, d) };
        let cfg = SolveConfig { max_iters: 60, rel_tol: 0.0, ..SolveConfig::default() };
        let rep = if spec.is_smooth() {
            gd_run(&spec, &x, &h0, &ops, &cfg).unwrap()
        } else {
            proxgd_run(&spec, &x, &h0, &ops, &cfg).unwrap()
        };
        for w in rep.objective_trace.windows(2) {
            worst_rise = worst_rise.max(w[1] - w[0]);
        }
    }
    let mut prox: f64 = 0.0;
    for _ in 0..20 {
        let beta = r.random_range(0.1..0.9);
        let v = normal(&mut r, 1, 2);
        let x = normal(&mut r, 1, 2);
        let got = prox_row_l21(&v, &x, beta).unwrap();
        let want = numeric_prox([v[(0, 0)], v[(0, 1)]], [x[(0, 0)], x[(0, 1)]], beta);
        prox = prox.max((got[(0, 0)] - want[0]).abs().max((got[(0, 1)] - want[1]).abs()));
    }
    let mut negatives = 0;
    for _ in 0..50 {
        let n = r.random_range(2..=20);
        let d = r.random_range(1..=3);
        let (_, ops) = random_graph(&mut r, n, 0.3);
        let spec = random_spec(&mut r, d, Regularizer::NonNeg);
        let x = normal(&mut r, n, d);
        let cfg = SolveConfig { max_iters: 30, rel_tol: 0.0, capture_trajectory: true, ..SolveConfig::default() };
        let rep = proxgd_run(&spec, &x, &x, &ops, &cfg).unwrap();
        negatives += rep.trajectory.unwrap()[1..].iter().flat_map(|h| h.iter()).filter(|&&v| v < 0.0).count();
    }
    let pass = worst_rise <= 1e-12 && prox < 1e-6 && negatives == 0;
    report(
        6,
        "solver properties",
        pass,
        format!("largest per-step rise {worst_rise:.3e} over 100 runs, prox error {prox:.3e}, negative ReLU entries {negatives}"),
    );
    assert!(pass);
}

#[test]
fn c7_toy_sbm_training() {
    let ds = sbm_generate(&SbmConfig::default()).unwrap();
    let cfg = TrainConfig::default();
    let start = Instant::now();
    let rep = train(&ds, &cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let coeffs = appnp_exact_expansion(cfg.k, cfg.alpha0).unwrap();
    let diffused = apply_adjacency_series(&coeffs, &ds.ops, &ds.x).unwrap();
    let oracle = logistic_regression_accuracy(&diffused, &ds.labels, ds.num_classes, &ds.mask(Split::Train), &ds.mask(Split::Test));
    let pass = rep.test_acc >= 0.90 && rep.test_acc >= oracle - 0.02 && rep.epochs.len() <= 501 && secs < 60.0;
    report(
        7,
        "SBM training",
        pass,
        format!("test acc {:.3}, oracle {oracle:.3}, {} epochs, {secs:.2}s", rep.test_acc, rep.epochs.len() - 1),
    );
    assert!(pass);
}

#[test]
fn c8_depth_does_not_degrade() {
    let ds = sbm_generate(&SbmConfig::default()).unwrap();
    let ks: Vec<usize> = std::iter::once(1).chain(4..=10).collect();
    let rows = depth_sweep(&ds, &TrainConfig::default(), &ks, SWEEP_SEEDS).unwrap();
    let base = rows[0].mean_acc;
    let worst = rows[1..].iter().map(|r| r.mean_acc).fold(f64::INFINITY, f64::min);
    let means: Vec<String> = rows.iter().map(|r| format!("K={}:{:.3}", r.k, r.mean_acc)).collect();
    let pass = rows.iter().all(|r| r.accs.len() == 10) && worst >= base - 0.02;
    report(8, "depth sweep", pass, format!("{} (over {SWEEP_SEEDS} seeds)", means.join(" ")));
    assert!(pass);
}

fn structural_errors(g: &Graph) -> (f64, f64) {
    let ops = gsd_unroll::normalize(g).unwrap();
    let n = g.num_nodes();
    let b = dense_b_hat(g);
    let identity_err = max_abs(&(b.transpose() * &b - (Matrix::identity(n, n) - ops.dense_a_hat())));
    let spectrum_err = laplacian_eigenvalues(&ops)
        .unwrap()
        .into_iter()
        .map(|l| (-l).max(l - 2.0).max(0.0))
        .fold(0.0, f64::max);
    (identity_err, spectrum_err)
}

#[test]
fn c9_structural_identities() {
    let mut r = rng(9000);
    let mut graphs: Vec<Graph> = Vec::new();
    for i in 0..60 {
        let n = r.random_range(1..=50);
        let p = [0.0, 0.05, 0.2, 0.5, 1.0][i % 5];
        graphs.push(random_graph(&mut r, n, p).0);
    }
    graphs.push(sbm_generate(&SbmConfig::default()).unwrap().graph);
    graphs.push(karate_dataset().unwrap().graph);
    let (mut ident, mut spec): (f64, f64) = (0.0, 0.0);
    for g in &graphs {
        let (a, b) = structural_errors(g);
        ident = ident.max(a);
        spec = spec.max(b);
    }
    let pass = ident < 1e-12 && spec <= 1e-10;
    report(
        9,
        "structural identities",
        pass,
        format!("{} graphs, ‖B̂ᵀB̂ − (I − Â)‖ {ident:.3e}, spectrum excursion {spec:.3e}", graphs.len()),
    );
    assert!(pass);
}
