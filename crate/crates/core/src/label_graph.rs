//! Thresholded label similarity graph and the derived propagation matrix.
//!
//! Edge weights are cosine similarities between label embeddings, kept only
//! when they reach the threshold `T`. Propagation row `p` spreads label `p`'s
//! mass over itself and its neighbours:
//!
//! ```text
//! a_pq = α·w_pq / (1 + α·Σ_k w_pk)      (q ≠ p, edge present)
//! a_pp =      1 / (1 + α·Σ_k w_pk)
//! ```
//!
//! so every row sums to one and total information is conserved.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingestion::LabelEmbeddings;
use crate::sparse::CsrMatrix;

/// Default edge threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.9;
/// Default propagation intensity.
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Cosine similarity of two embedding rows, clamped to `[-1, 1]`.
pub fn cosine_similarity(emb: &LabelEmbeddings, p: usize, q: usize) -> f64 {
    let dot: f64 = emb.row(p).iter().zip(emb.row(q)).map(|(a, b)| a * b).sum();
    (dot / (emb.norm(p) * emb.norm(q))).clamp(-1.0, 1.0)
}

/// Sparse symmetric weight matrix `W` with an implicit zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelGraph {
    threshold: f64,
    weights: CsrMatrix,
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "threshold {threshold} outside (0, 1]"
        )))
    }
}

impl LabelGraph {
    /// Keeps exactly the label pairs whose cosine similarity is `>= threshold`.
    pub fn build(emb: &LabelEmbeddings, threshold: f64) -> Result<Self> {
        check_threshold(threshold)?;
        let k = emb.len();
        let upper: Vec<Vec<(u32, f64)>> = (0..k)
            .into_par_iter()
            .map(|p| {
                ((p + 1)..k)
                    .filter_map(|q| {
                        let w = cosine_similarity(emb, p, q);
                        (w >= threshold).then_some((q as u32, w))
                    })
                    .collect()
            })
            .collect();
        Ok(Self::mirror(k, threshold, upper))
    }

    /// Builds from upper-triangle edge lists (`q > p` in row `p`).
    fn mirror(k: usize, threshold: f64, upper: Vec<Vec<(u32, f64)>>) -> Self {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); k];
        for (p, edges) in upper.iter().enumerate() {
            for &(q, w) in edges {
                rows[q as usize].push((p as u32, w));
            }
        }
        // lower-triangle entries were pushed in ascending p, upper ones are ascending q > row
        for (p, edges) in upper.into_iter().enumerate() {
            rows[p].extend(edges);
        }
        LabelGraph {
            threshold,
            weights: CsrMatrix::from_rows(rows),
        }
    }

    /// Reassembles a graph from `(p, q, w)` triples with `p < q`.
    pub fn from_edges(k: usize, threshold: f64, edges: &[(u32, u32, f64)]) -> Result<Self> {
        check_threshold(threshold)?;
        let mut upper: Vec<Vec<(u32, f64)>> = vec![Vec::new(); k];
        for &(p, q, w) in edges {
            if p >= q || q as usize >= k {
                return Err(Error::InvalidParameter(format!("bad edge ({p}, {q})")));
            }
            if !(w >= threshold && w <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({p}, {q}) weight {w} outside [{threshold}, 1]"
                )));
            }
            upper[p as usize].push((q, w));
        }
        for row in &mut upper {
            row.sort_by_key(|e| e.0);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidParameter("duplicate edge".into()));
            }
        }
        Ok(Self::mirror(k, threshold, upper))
    }

    pub fn label_count(&self) -> usize {
        self.weights.dim()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn weights(&self) -> &CsrMatrix {
        &self.weights
    }

    pub fn weight(&self, p: usize, q: usize) -> f64 {
        self.weights.get(p, q)
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.weights.nnz() / 2
    }

    /// Fraction of the `K(K-1)/2` possible label pairs that carry an edge.
    pub fn density(&self) -> f64 {
        let k = self.label_count() as f64;
        if k < 2.0 {
            0.0
        } else {
            self.edge_count() as f64 / (k * (k - 1.0) / 2.0)
        }
    }

    /// Upper-triangle edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..self.label_count()).flat_map(move |p| {
            self.weights
                .row_entries(p)
                .filter(move |&(q, _)| q as usize > p)
                .map(move |(q, w)| (p as u32, q, w))
        })
    }

    /// Derives the row-stochastic propagation matrix for intensity `alpha`.
    pub fn propagation(&self, alpha: f64) -> Result<Propagation> {
        Propagation::new(self, alpha)
    }
}

/// Row-stochastic propagation matrix `A` plus its transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    alpha: f64,
    forward: CsrMatrix,
    adjoint: CsrMatrix,
}

impl Propagation {
    pub fn new(graph: &LabelGraph, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "propagation alpha {alpha} must be finite and nonnegative"
            )));
        }
        let k = graph.label_count();
        let rows: Vec<Vec<(u32, f64)>> = (0..k)
            .map(|p| {
                let (cols, ws) = graph.weights.row(p);
                let denom = 1.0 + alpha * ws.iter().sum::<f64>();
                let mut row = Vec::with_capacity(cols.len() + 1);
                let mut diag_done = false;
                for (&q, &w) in cols.iter().zip(ws) {
                    if !diag_done && q as usize > p {
                        row.push((p as u32, 1.0 / denom));
                        diag_done = true;
                    }
                    let a = alpha * w / denom;
                    if a > 0.0 {
                        row.push((q, a));
                    }
                }
                if !diag_done {
                    row.push((p as u32, 1.0 / denom));
                }
                row
            })
            .collect();
        let forward = CsrMatrix::from_rows(rows);
        let adjoint = forward.transpose();
        Ok(Propagation {
            alpha,
            forward,
            adjoint,
        })
    }

    /// Identity propagation over `k` labels (no edges, or `alpha = 0`).
    pub fn identity(k: usize) -> Self {
        Propagation {
            alpha: 0.0,
            forward: CsrMatrix::identity(k),
            adjoint: CsrMatrix::identity(k),
        }
    }

    pub fn label_count(&self) -> usize {
        self.forward.dim()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `A`, row `p` holding `a_pq`.
    pub fn matrix(&self) -> &CsrMatrix {
        &self.forward
    }

    /// `Aᵀ`, row `q` holding `a_pq` for every source `p`.
    pub fn transpose(&self) -> &CsrMatrix {
        &self.adjoint
    }

    pub fn entry(&self, p: usize, q: usize) -> f64 {
        self.forward.get(p, q)
    }

    pub fn self_retention(&self, p: usize) -> f64 {
        self.forward.get(p, p)
    }

    /// Mass transport `ê_q = Σ_p a_pq e_p`.
    pub(crate) fn push(&self, e: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; e.len()];
        for (p, &mass) in e.iter().enumerate() {
            if mass != 0.0 {
                for (q, a) in self.forward.row_entries(p) {
                    out[q as usize] += a * mass;
                }
            }
        }
        out
    }

    /// Matrix-vector product `(A v)_p = Σ_q a_pq v_q`.
    pub fn pull(&self, v: &[f64]) -> Vec<f64> {
        self.forward.mul_vec(v)
    }
}
