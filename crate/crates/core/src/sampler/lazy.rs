//! Lazy greedy over a max-heap of cached scores.
//!
//! Candidate scores never increase as the selection grows, so a cached score
//! is an upper bound. The heap top is re-scored until its fresh key still
//! beats the next cached key; under the shared total order on keys that
//! winner is exactly the plain greedy choice.

use std::collections::BinaryHeap;
use std::time::Instant;

use rayon::prelude::*;

use super::{check_points, commit, finish, CandidateKey, SamplerConfig, Scorer, Selection, SelectionState};
use crate::error::{Error, Result};
use crate::ingestion::DataPoint;
use crate::label_graph::Propagation;
use crate::measure::InfoScore;

#[derive(Debug, PartialEq, Eq)]
struct Entry {
    key: CandidateKey,
    /// Iteration at which `key.score` was computed.
    stamp: usize,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key.cmp(&other.key)
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Same contract and output as [`super::select`], with stale-bound re-evaluation.
pub fn lazy_select<F: InfoScore + ?Sized>(
    points: &[DataPoint],
    prop: &Propagation,
    f: &F,
    cfg: &SamplerConfig,
) -> Result<Selection> {
    cfg.validate(points.len())?;
    check_points(points, prop)?;
    let start = Instant::now();
    let mut state = SelectionState::new(points.len(), prop.label_count());
    let mut scorer = Scorer::new(prop, f, cfg);

    let initial: Vec<Entry> = points
        .par_iter()
        .enumerate()
        .map(|(i, d)| Entry {
            key: CandidateKey {
                score: scorer.score(&state, d),
                quality: d.quality,
                index: i,
            },
            stamp: 0,
        })
        .collect();
    let mut evaluations = initial.len() as u64;
    let mut heap = BinaryHeap::from(initial);
    let mut trace = Vec::with_capacity(cfg.budget);

    for iteration in 0..cfg.budget {
        let best = loop {
            let top = heap
                .pop()
                .ok_or_else(|| Error::Invariant("candidate heap exhausted".into()))?;
            if top.stamp == iteration {
                break top.key;
            }
            let d = &points[top.key.index];
            let fresh = CandidateKey {
                score: scorer.score(&state, d),
                ..top.key
            };
            evaluations += 1;
            if heap.peek().is_none_or(|next| fresh >= next.key) {
                break fresh;
            }
            heap.push(Entry {
                key: fresh,
                stamp: iteration,
            });
        };
        trace.push(commit(&mut state, &mut scorer, points, prop, f, best, iteration)?);
    }
    Ok(finish(points, prop, f, cfg, state, trace, evaluations, start))
}
