//! Zachary's karate club: 34 members, 78 friendships, split into the
//! instructor's faction (class 0) and the administrator's (class 1).

use super::data::{Dataset, Split};
use crate::{Graph, Matrix, Result};

pub const KARATE_EDGES: [(usize, usize); 78] = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11),
    (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7), (1, 13),
    (1, 17), (1, 19), (1, 21), (1, 30), (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27),
    (2, 28), (2, 32), (3, 7), (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16),
    (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33), (15, 32), (15, 33),
    (18, 32), (18, 33), (19, 33), (20, 32), (20, 33), (22, 32), (22, 33), (23, 25), (23, 27), (23, 29),
    (23, 32), (23, 33), (24, 25), (24, 27), (24, 31), (25, 31), (26, 29), (26, 33), (27, 33), (28, 31),
    (28, 33), (29, 32), (29, 33), (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
];

/// Members who sided with the instructor.
pub const INSTRUCTOR_FACTION: [usize; 17] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 13, 16, 17, 19, 21];

const TRAIN: [usize; 8] = [0, 1, 2, 3, 33, 32, 31, 30];
const VAL: [usize; 8] = [4, 5, 6, 7, 29, 28, 27, 26];

/// Features are the one-hot encoding of each member's degree (0..=17).
pub fn karate_dataset() -> Result<Dataset> {
    let n = 34;
    let graph = Graph::new(n, KARATE_EDGES)?;
    let mut degree = vec![0usize; n];
    for &(u, v) in &KARATE_EDGES {
        degree[u] += 1;
        degree[v] += 1;
    }
    let width = degree.iter().max().copied().unwrap_or(0) + 1;
    let mut x = Matrix::zeros(n, width);
    for (i, &d) in degree.iter().enumerate() {
        x[(i, d)] = 1.0;
    }
    let labels = (0..n)
        .map(|i| usize::from(!INSTRUCTOR_FACTION.contains(&i)))
        .collect();
    let splits = (0..n)
        .map(|i| {
            if TRAIN.contains(&i) {
                Split::Train
            } else if VAL.contains(&i) {
                Split::Val
            } else {
                Split::Test
            }
        })
        .collect();
    Dataset::new(&graph, x, labels, splits)
}
