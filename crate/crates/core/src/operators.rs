//! Symmetric normalized operators of a self-looped graph.
//!
//! `Â = D^{-1/2} A D^{-1/2}` with `D = diag(A·1)`, `L̂ = I − Â`, and the
//! oriented normalized incidence `B̂ = B D^{-1/2}` over non-loop edges, so
//! that `B̂ᵀB̂ = L̂`. Loops add equally to `D` and `A` and therefore never
//! appear in `B̂`.

use crate::sparse::CsrMatrix;
use crate::{Error, Graph, Matrix, Result, Signal};

#[derive(Debug, Clone)]
pub struct NormalizedOperators {
    a_hat: CsrMatrix,
    degrees: Vec<f64>,
    non_loop_edges: Vec<(usize, usize)>,
}

/// Builds `Â` and the degree vector. The graph must already carry a
/// self-loop on every node.
pub fn normalize(g: &Graph) -> Result<NormalizedOperators> {
    if let Some(i) = g.first_missing_loop() {
        return Err(Error::MissingSelfLoop(i));
    }
    let n = g.num_nodes();
    let mut degrees = vec![0.0f64; n];
    for &(u, v) in g.edges() {
        degrees[u] += 1.0;
        if u != v {
            degrees[v] += 1.0;
        }
    }
    if let Some(i) = degrees.iter().position(|&d| d <= 0.0) {
        return Err(Error::ZeroDegree(i));
    }
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut triplets = Vec::with_capacity(2 * g.edges().len());
    for &(u, v) in g.edges() {
        let w = inv_sqrt[u] * inv_sqrt[v];
        triplets.push((u, v, w));
        if u != v {
            triplets.push((v, u, w));
        }
    }
    let a_hat = CsrMatrix::from_triplets(n, n, triplets)?;
    Ok(NormalizedOperators {
        a_hat,
        degrees,
        non_loop_edges: g.non_loop_edges().collect(),
    })
}

impl NormalizedOperators {
    pub fn num_nodes(&self) -> usize {
        self.degrees.len()
    }

    pub fn a_hat(&self) -> &CsrMatrix {
        &self.a_hat
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// `Â·x`.
    pub fn spmm(&self, x: &Signal) -> Result<Signal> {
        self.a_hat.mul_dense(x)
    }

    /// `L̂·x = x − Â·x`.
    pub fn laplacian_apply(&self, x: &Signal) -> Result<Signal> {
        Ok(x - self.spmm(x)?)
    }

    /// `Â^k·x` by repeated products.
    pub fn power_apply(&self, x: &Signal, k: usize) -> Result<Signal> {
        let mut h = x.clone();
        for _ in 0..k {
            h = self.spmm(&h)?;
        }
        Ok(h)
    }

    /// `D^{1/2}·1`, the eigenvector of `Â` for eigenvalue 1.
    pub fn sqrt_degrees(&self) -> Signal {
        Matrix::from_iterator(self.num_nodes(), 1, self.degrees.iter().map(|d| d.sqrt()))
    }

    /// `B̂` over non-loop edges; row `e = (u, v)` with `u < v` holds
    /// `+d_u^{-1/2}` at `u` and `−d_v^{-1/2}` at `v`.
    pub fn b_hat(&self) -> CsrMatrix {
        let triplets = self
            .non_loop_edges
            .iter()
            .enumerate()
            .flat_map(|(e, &(u, v))| {
                [
                    (e, u, 1.0 / self.degrees[u].sqrt()),
                    (e, v, -1.0 / self.degrees[v].sqrt()),
                ]
            });
        CsrMatrix::from_triplets(self.non_loop_edges.len(), self.num_nodes(), triplets)
            .expect("edge endpoints are in range")
    }

    pub fn dense_a_hat(&self) -> Matrix {
        self.a_hat.to_dense()
    }

    pub fn dense_laplacian(&self) -> Matrix {
        Matrix::identity(self.num_nodes(), self.num_nodes()) - self.dense_a_hat()
    }
}
