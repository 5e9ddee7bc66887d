use std::path::Path;

use gsd_unroll::gsd::{closed_form_ppnp, objective, GsdSpec, ObjectiveValue, Regularizer};
use gsd_unroll::linalg::max_abs_diff;
use gsd_unroll::signal_io::{read_signal_csv, write_signal_csv};
use gsd_unroll::solvers::{gd_run, proxgd_run, SolveConfig, SolveReport, StepSize};
use gsd_unroll::spectral::{
    apply_polynomial_filter, frequency_response, gcnii_filter_weights, theta_to_adjacency_coeffs,
    theta_to_ugdgnn, FilterCoeffs, GcniiFilterWeights,
};
use gsd_unroll::trainer::{
    depth_sweep, karate_dataset, load_dataset_files, sbm_generate, sweep_csv, train as train_model,
    Dataset, SbmConfig, SweepRow, TrainConfig, TrainReport,
};
use gsd_unroll::unrolled::equivalence::{
    random_graph, random_signal, trial_rng, BatchReport, ER_EDGE_PROB, ER_MAX_NODES, ER_MIN_NODES,
};
use gsd_unroll::unrolled::{equivalence_batch, forward, ModelKind, ModelSpec, Ugdgnn};
use gsd_unroll::{add_self_loops, load_edge_list, normalize, Graph, Matrix, NormalizedOperators};
use serde::Serialize;

use crate::manifest::RunRecorder;
use crate::{CliError, DenoiseArgs, EquivArgs, FilterArgs, SolverKind, SweepArgs, TrainArgs, TrainFlags};

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn config_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("config serializes")
}

/// Loads an edge list, pads trailing isolated nodes up to `min_nodes`, and
/// adds self-loops.
fn load_graph(rec: &mut RunRecorder, path: &Path, min_nodes: usize) -> Result<(Graph, NormalizedOperators), CliError> {
    let text = rec.read_input(path)?;
    let mut g = load_edge_list(&text)?;
    if g.num_nodes() < min_nodes {
        g = Graph::new(min_nodes, g.edges().iter().copied())?;
    }
    let g = add_self_loops(&g);
    let ops = normalize(&g)?;
    Ok((g, ops))
}

#[derive(Serialize)]
struct DenoiseReport {
    solver: SolverKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    objective: ObjectiveValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    solve: Option<SolveReport>,
}

/// Teleport weight of a spec whose minimizer is a PPNP closed form:
/// identity `T`s and no regularizer give `α/(α+β)`.
fn ppnp_gamma_of(spec: &GsdSpec) -> Result<f64, CliError> {
    let d = spec.dim();
    let eye = Matrix::identity(d, d);
    if spec.regularizer() != Regularizer::None || spec.t_alpha() != &eye || spec.t_beta() != &eye {
        return Err(CliError::Numeric(
            "closed-form solve needs identity T matrices and no regularizer (or pass --gamma)".into(),
        ));
    }
    Ok(spec.alpha() / (spec.alpha() + spec.beta()))
}

pub fn denoise(a: &DenoiseArgs) -> Result<(), CliError> {
    let mut rec = RunRecorder::new("denoise", Some(&a.out))?;
    let features = rec.read_input(&a.features)?;
    let x = read_signal_csv(&features)?;
    let (_, ops) = load_graph(&mut rec, &a.graph, x.nrows())?;
    if ops.num_nodes() != x.nrows() {
        return Err(CliError::Input(format!(
            "graph has {} nodes but features have {} rows",
            ops.num_nodes(),
            x.nrows()
        )));
    }
    let spec = match &a.spec {
        Some(p) => {
            let text = rec.read_input(p)?;
            let spec: GsdSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            if spec.dim() != x.ncols() {
                return Err(CliError::Input(format!(
                    "spec is {}-dimensional but features have {} columns",
                    spec.dim(),
                    x.ncols()
                )));
            }
            Some(spec)
        }
        None => None,
    };
    let (h, report) = match a.solver {
        SolverKind::ClosedForm => {
            let gamma = match (a.gamma, &spec) {
                (Some(g), _) => g,
                (None, Some(s)) => ppnp_gamma_of(s)?,
                (None, None) => return Err(CliError::Input("closed-form needs --gamma or --spec".into())),
            };
            let h = closed_form_ppnp(&ops, &x, gamma)?;
            let objective_spec = match spec {
                Some(s) => s,
                None => GsdSpec::ppnp(x.ncols(), gamma)?,
            };
            let objective = objective(&objective_spec, &h, &x, &ops)?;
            let report = DenoiseReport {
                solver: a.solver,
                gamma: Some(gamma),
                objective,
                solve: None,
            };
            (h, report)
        }
        SolverKind::Gd | SolverKind::Proxgd => {
            let spec = spec.ok_or_else(|| CliError::Input(format!("--solver {:?} needs --spec", a.solver)))?;
            let cfg = SolveConfig {
                max_iters: a.iters,
                stepsize: a.stepsize.map_or(StepSize::Auto, StepSize::Fixed),
                rel_tol: a.rel_tol,
                capture_trajectory: false,
            };
            let r = if a.solver == SolverKind::Gd {
                gd_run(&spec, &x, &x, &ops, &cfg)?
            } else {
                proxgd_run(&spec, &x, &x, &ops, &cfg)?
            };
            let objective = objective(&spec, &r.final_signal, &x, &ops)?;
            let h = r.final_signal.clone();
            let report = DenoiseReport {
                solver: a.solver,
                gamma: None,
                objective,
                solve: Some(r),
            };
            (h, report)
        }
    };
    rec.write("denoised.csv", &write_signal_csv(&h))?;
    rec.write("solve_report.json", &to_json(&report))?;
    rec.finish(config_json(a))
}

fn random_graph_declaration() -> String {
    format!(
        "Erdos-Renyi G(n, p): n uniform in [{ER_MIN_NODES}, {ER_MAX_NODES}], p = {ER_EDGE_PROB}, self-loops added; \
         features standard normal with d uniform in [1, 4]"
    )
}

#[derive(Serialize)]
struct EquivSummary {
    trials: usize,
    seed: u64,
    tol: f64,
    pass: bool,
    models: Vec<BatchReport>,
}

pub fn equiv(a: &EquivArgs) -> Result<(), CliError> {
    let kinds: Vec<ModelKind> = if a.model.eq_ignore_ascii_case("all") {
        ModelKind::UNROLLABLE.to_vec()
    } else {
        a.model
            .split(',')
            .map(|s| s.trim().parse::<ModelKind>())
            .collect::<Result<_, _>>()?
    };
    if a.trials == 0 {
        return Err(CliError::Input("--trials must be >= 1".into()));
    }
    let mut rec = RunRecorder::new("equiv", a.out.as_deref())?;
    rec.declare_random_graphs(random_graph_declaration());
    let models = kinds
        .into_iter()
        .map(|k| equivalence_batch(k, a.trials, a.seed, a.tol))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = EquivSummary {
        trials: a.trials,
        seed: a.seed,
        tol: a.tol,
        pass: models.iter().all(|m| m.pass),
        models,
    };
    let text = to_json(&summary);
    print!("{text}");
    rec.write("equiv.json", &text)?;
    rec.finish(config_json(a))?;
    if summary.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = summary.models.iter().filter(|m| !m.pass).map(|m| m.model.as_str()).collect();
        Err(CliError::CheckFailed(format!("equivalence failed for {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct Verification {
    graph: String,
    nodes: usize,
    signal_dim: usize,
    max_abs_diff: f64,
    tol: f64,
    pass: bool,
}

#[derive(Serialize)]
#[serde(untagged)]
enum GcniiOutcome {
    Weights(GcniiFilterWeights),
    NotExpressible { error: String },
}

#[derive(Serialize)]
struct FilterReport {
    theta: Vec<f64>,
    /// Coefficients on `Â^k`, which are the UGDGNN `γ^{(k)}`.
    gamma: Vec<f64>,
    ugdgnn: Ugdgnn,
    gcnii: GcniiOutcome,
    verification: Verification,
}

pub fn filter(a: &FilterArgs) -> Result<(), CliError> {
    let theta = FilterCoeffs::new(a.theta.clone())?;
    let mut rec = RunRecorder::new("filter", a.out.as_deref())?;
    let mut rng = trial_rng(a.seed, 0);
    let given_x = match &a.features {
        Some(p) => Some(read_signal_csv(&rec.read_input(p)?)?),
        None => None,
    };
    let (graph_label, ops) = match &a.graph {
        Some(p) => {
            let min = given_x.as_ref().map_or(0, Matrix::nrows);
            (p.display().to_string(), load_graph(&mut rec, p, min)?.1)
        }
        None => {
            rec.declare_random_graphs(random_graph_declaration());
            let g = random_graph(&mut rng, ER_MIN_NODES, ER_MAX_NODES, ER_EDGE_PROB)?;
            ("random".to_string(), normalize(&g)?)
        }
    };
    let x = match given_x {
        Some(x) if x.nrows() == ops.num_nodes() => x,
        Some(x) => {
            return Err(CliError::Input(format!(
                "graph has {} nodes but features have {} rows",
                ops.num_nodes(),
                x.nrows()
            )))
        }
        None => random_signal(&mut rng, ops.num_nodes(), 3),
    };
    let ugd = theta_to_ugdgnn(&theta)?;
    let via_ugdgnn = forward(&ModelSpec::Ugdgnn(ugd.clone()), &ops, &x)?;
    let direct = apply_polynomial_filter(&theta, &ops, &x)?;
    let diff = max_abs_diff(&via_ugdgnn, &direct);
    let gcnii = match gcnii_filter_weights(&theta) {
        Ok(w) => GcniiOutcome::Weights(w),
        Err(e) => GcniiOutcome::NotExpressible { error: e.to_string() },
    };
    let report = FilterReport {
        theta: theta.theta().to_vec(),
        gamma: theta_to_adjacency_coeffs(&theta)?,
        ugdgnn: ugd,
        gcnii,
        verification: Verification {
            graph: graph_label,
            nodes: ops.num_nodes(),
            signal_dim: x.ncols(),
            max_abs_diff: diff,
            tol: a.tol,
            pass: diff < a.tol,
        },
    };
    let text = to_json(&report);
    print!("{text}");
    rec.write("filter.json", &text)?;
    if a.graph.is_some() {
        let mut csv = String::from("lambda,response\n");
        for (l, r) in frequency_response(&theta, &ops)? {
            csv.push_str(&format!("{l},{r}\n"));
        }
        rec.write("response.csv", &csv)?;
    }
    rec.finish(config_json(a))?;
    if report.verification.pass {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!(
            "filter verification diff {diff:e} exceeds tolerance {:e}",
            a.tol
        )))
    }
}

fn load_dataset(rec: &mut RunRecorder, flags: &TrainFlags) -> Result<Dataset, CliError> {
    match flags.dataset.as_str() {
        "sbm" => Ok(sbm_generate(&SbmConfig {
            seed: flags.data_seed,
            ..SbmConfig::default()
        })?),
        "karate" => Ok(karate_dataset()?),
        other => {
            let Some(list) = other.strip_prefix("files:") else {
                return Err(CliError::Input(format!(
                    "unknown dataset `{other}`; expected sbm, karate or files:EDGES,FEATURES,LABELS"
                )));
            };
            let parts: Vec<&str> = list.split(',').collect();
            let [edges, features, labels] = parts[..] else {
                return Err(CliError::Input(format!(
                    "files: needs three comma-separated paths, got {}",
                    parts.len()
                )));
            };
            let e = rec.read_input(Path::new(edges))?;
            let f = rec.read_input(Path::new(features))?;
            let l = rec.read_input(Path::new(labels))?;
            Ok(load_dataset_files(&e, &f, &l)?)
        }
    }
}

fn train_config(flags: &TrainFlags) -> TrainConfig {
    TrainConfig {
        lr: flags.lr,
        weight_decay: flags.weight_decay,
        epochs: flags.epochs,
        seed: flags.seed,
        k: flags.k,
        alpha0: flags.alpha0,
        patience: flags.patience,
        feature_dropout: flags.feature_dropout,
    }
}

pub fn train(a: &TrainArgs) -> Result<(), CliError> {
    let mut rec = RunRecorder::new("train", a.out.as_deref())?;
    let ds = load_dataset(&mut rec, &a.flags)?;
    let cfg = train_config(&a.flags);
    let report: TrainReport = train_model(&ds, &cfg)?;
    let text = to_json(&report);
    print!("{text}");
    rec.write("train_report.json", &text)?;
    rec.finish(config_json(&serde_json::json!({ "args": a, "train_config": cfg })))
}

#[derive(Serialize)]
struct SweepReport<'a> {
    seeds: usize,
    rows: &'a [SweepRow],
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    if a.ks.is_empty() || a.seeds == 0 {
        return Err(CliError::Input("--ks and --seeds must be non-empty".into()));
    }
    let mut rec = RunRecorder::new("sweep", a.out.as_deref())?;
    let ds = load_dataset(&mut rec, &a.flags)?;
    let cfg = train_config(&a.flags);
    let rows = depth_sweep(&ds, &cfg, &a.ks, a.seeds)?;
    let csv = sweep_csv(&rows);
    print!("{csv}");
    rec.write("sweep.csv", &csv)?;
    rec.write("sweep.json", &to_json(&SweepReport { seeds: a.seeds, rows: &rows }))?;
    rec.finish(config_json(a))
}
