//! Semi-supervised node classification with a trainable UGDGNN.

pub mod adam;
pub mod data;
pub mod karate;
pub mod model;
pub mod sweep;
pub mod train;

pub use adam::{adam_step, AdamState};
pub use data::{load_dataset_files, read_labels_csv, sbm_block_of, sbm_generate, Dataset, SbmConfig, Split};
pub use karate::karate_dataset;
pub use model::{
    accuracy, backward, cross_entropy_masked, forward_logits, predict, softmax_rows, ForwardCache,
    Gradients, PreMap, PropagationBase, UgdgnnParams,
};
pub use sweep::{depth_sweep, sweep_csv, SweepRow, SWEEP_SEEDS};
pub use train::{train, train_from, EpochStats, TrainConfig, TrainReport};
