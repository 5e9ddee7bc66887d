//! Node-classification datasets: validation, a stochastic block model
//! generator, and the three-file on-disk format.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::signal_io::{read_signal_csv, write_signal_csv};
use crate::{add_self_loops, load_edge_list, normalize, Error, Graph, Matrix, NormalizedOperators, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Train => "train",
            Self::Val => "val",
            Self::Test => "test",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub ops: NormalizedOperators,
    pub x: Matrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub splits: Vec<Split>,
}

impl Dataset {
    /// Adds self-loops, normalizes, and checks labels and splits.
    pub fn new(graph: &Graph, x: Matrix, labels: Vec<usize>, splits: Vec<Split>) -> Result<Self> {
        let graph = add_self_loops(graph);
        let n = graph.num_nodes();
        if x.nrows() != n || labels.len() != n || splits.len() != n {
            return Err(Error::Dataset(format!(
                "{n} nodes but {} feature rows, {} labels, {} split entries",
                x.nrows(),
                labels.len(),
                splits.len()
            )));
        }
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        for c in 0..num_classes {
            let in_train = labels
                .iter()
                .zip(&splits)
                .any(|(&l, &s)| l == c && s == Split::Train);
            if !in_train {
                return Err(Error::Dataset(format!("class {c} has no training node")));
            }
        }
        if num_classes < 2 {
            return Err(Error::Dataset("need at least two classes".into()));
        }
        let ops = normalize(&graph)?;
        Ok(Self {
            graph,
            ops,
            x,
            labels,
            num_classes,
            splits,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn mask(&self, split: Split) -> Vec<bool> {
        self.splits.iter().map(|&s| s == split).collect()
    }

    pub fn count(&self, split: Split) -> usize {
        self.splits.iter().filter(|&&s| s == split).count()
    }

    /// Edge list, feature CSV and `label,split` CSV.
    pub fn to_files(&self) -> (String, String, String) {
        let mut labels = String::new();
        for (l, s) in self.labels.iter().zip(&self.splits) {
            labels.push_str(&format!("{l},{}\n", s.as_str()));
        }
        (self.graph.to_edge_list(), write_signal_csv(&self.x), labels)
    }
}

/// Parses the `label,split` CSV.
pub fn read_labels_csv(text: &str) -> Result<(Vec<usize>, Vec<Split>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut labels = Vec::new();
    let mut splits = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected `label,split`, got {} fields", record.len()),
            });
        }
        let label = record[0].parse::<usize>().map_err(|e| Error::Parse {
            line: i + 1,
            msg: format!("bad label `{}`: {e}", &record[0]),
        })?;
        let split = match &record[1] {
            "train" => Split::Train,
            "val" => Split::Val,
            "test" => Split::Test,
            other => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("split must be train, val or test, got `{other}`"),
                })
            }
        };
        labels.push(label);
        splits.push(split);
    }
    Ok((labels, splits))
}

pub fn load_dataset_files(edges: &str, features: &str, labels: &str) -> Result<Dataset> {
    let mut graph = load_edge_list(edges)?;
    let x = read_signal_csv(features)?;
    let (labels, splits) = read_labels_csv(labels)?;
    if graph.num_nodes() < labels.len() {
        // trailing isolated nodes never appear in an edge list without a header
        graph = Graph::new(labels.len(), graph.edges().iter().copied())?;
    }
    Dataset::new(&graph, x, labels, splits)
}

pub const TRAIN_PER_CLASS: usize = 20;
pub const VAL_PER_CLASS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub n: usize,
    pub blocks: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub d: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        Self {
            n: 200,
            blocks: 2,
            p_in: 0.1,
            p_out: 0.01,
            d: 8,
            noise_sigma: 1.0,
            seed: 0,
        }
    }
}

/// Block of node `i` under the contiguous, as-equal-as-possible assignment.
pub fn sbm_block_of(n: usize, blocks: usize, i: usize) -> usize {
    let base = n / blocks;
    let extra = n % blocks;
    let cut = extra * (base + 1);
    if i < cut {
        i / (base + 1)
    } else {
        extra + (i - cut) / base
    }
}

/// Stochastic block model with class-mean features `e_c/√2` (unit pairwise
/// distance) plus `N(0, σ²)` noise and a 20/30/rest split per class.
pub fn sbm_generate(cfg: &SbmConfig) -> Result<Dataset> {
    let SbmConfig {
        n,
        blocks,
        p_in,
        p_out,
        d,
        noise_sigma,
        seed,
    } = *cfg;
    if blocks < 2 {
        return Err(Error::InvalidParameter("need at least two blocks".into()));
    }
    if !(p_in > p_out && p_out >= 0.0 && p_in <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 1 >= p_in > p_out >= 0, got p_in={p_in}, p_out={p_out}"
        )));
    }
    if d < blocks {
        return Err(Error::InvalidParameter(format!(
            "feature dimension {d} cannot hold {blocks} orthogonal class means"
        )));
    }
    if noise_sigma.is_nan() || noise_sigma < 0.0 {
        return Err(Error::InvalidParameter("noise_sigma must be >= 0".into()));
    }
    let min_block = n / blocks;
    if min_block < TRAIN_PER_CLASS + VAL_PER_CLASS + 1 {
        return Err(Error::Dataset(format!(
            "blocks of {min_block} nodes are too small for a {TRAIN_PER_CLASS}/{VAL_PER_CLASS}/rest split"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n).map(|i| sbm_block_of(n, blocks, i)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let mean = std::f64::consts::FRAC_1_SQRT_2;
    let mut x = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            let noise: f64 = rng.sample(StandardNormal);
            x[(i, j)] = noise_sigma * noise + if j == labels[i] { mean } else { 0.0 };
        }
    }
    let mut splits = vec![Split::Test; n];
    for c in 0..blocks {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for (rank, &i) in members.iter().enumerate() {
            splits[i] = if rank < TRAIN_PER_CLASS {
                Split::Train
            } else if rank < TRAIN_PER_CLASS + VAL_PER_CLASS {
                Split::Val
            } else {
                Split::Test
            };
        }
    }
    Dataset::new(&Graph::new(n, edges)?, x, labels, splits)
}
