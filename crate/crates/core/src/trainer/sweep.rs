//! Depth sweep: train once per (K, seed) cell and summarize test accuracy.

use rayon::prelude::*;
use serde::Serialize;

use super::data::Dataset;
use super::train::{train, TrainConfig};
use crate::Result;

pub const SWEEP_SEEDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub mean_acc: f64,
    /// Population standard deviation over the seeds.
    pub std_acc: f64,
    pub accs: Vec<f64>,
}

/// Seeds are `cfg.seed, cfg.seed + 1, ...`; everything else in `cfg` is shared.
pub fn depth_sweep(ds: &Dataset, cfg: &TrainConfig, ks: &[usize], seeds: usize) -> Result<Vec<SweepRow>> {
    let cells: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| (0..seeds).map(move |s| (k, s)))
        .collect();
    let accs = cells
        .par_iter()
        .map(|&(k, s)| {
            let cell = TrainConfig {
                k,
                seed: cfg.seed.wrapping_add(s as u64),
                ..cfg.clone()
            };
            train(ds, &cell).map(|r| r.test_acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ks
        .iter()
        .zip(accs.chunks(seeds.max(1)))
        .map(|(&k, a)| {
            let (mean, std) = mean_std(a);
            SweepRow {
                k,
                mean_acc: mean,
                std_acc: std,
                accs: a.to_vec(),
            }
        })
        .collect())
}

fn mean_std(a: &[f64]) -> (f64, f64) {
    if a.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = a.len() as f64;
    let mean = a.iter().sum::<f64>() / n;
    let var = a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("K,mean_acc,std_acc\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.k, r.mean_acc, r.std_acc));
    }
    out
}
