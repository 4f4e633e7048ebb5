//! Reference selectors used for comparison against information-gain selection.
//!
//! The facility-location selector is a compact stand-in for quality/diversity
//! methods that score candidates by pairwise similarity in an embedding space.
//! It exists for timing and shape comparisons only.

use std::collections::BinaryHeap;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingestion::DataPoint;
use crate::sampler::CandidateKey;

pub const DEFAULT_RANDOM_SEED: u64 = 42;

fn check_budget(budget: usize, pool: usize) -> Result<()> {
    if budget == 0 || budget > pool {
        Err(Error::InvalidBudget { budget, pool })
    } else {
        Ok(())
    }
}

/// Uniform sample without replacement, in draw order.
pub fn random_select(pool_len: usize, budget: usize, seed: u64) -> Result<Vec<usize>> {
    check_budget(budget, pool_len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, pool_len, budget).into_vec())
}

/// Highest quality first, ties by pool index.
pub fn quality_top_n(points: &[DataPoint], budget: usize) -> Result<Vec<usize>> {
    check_budget(budget, points.len())?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[b].quality.total_cmp(&points[a].quality).then(a.cmp(&b)));
    order.truncate(budget);
    Ok(order)
}

/// Per-point embeddings, unit-normalized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEmbeddings {
    dim: usize,
    values: Vec<f32>,
}

impl PointEmbeddings {
    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::InvalidParameter("point embeddings are empty".into()));
        }
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    line: i + 1,
                    expected: dim,
                    found: row.len(),
                });
            }
            let norm = row.iter().map(|v| v * v).sum::<f32>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::ZeroVector {
                    label: format!("point #{i}"),
                });
            }
            values.extend(row.iter().map(|v| v / norm));
        }
        Ok(PointEmbeddings { dim, values })
    }

    /// `n dim` header followed by one whitespace-separated row per point.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, reason: &str| Error::MalformedEmbeddings {
            line,
            reason: reason.to_string(),
        };
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing `n dim` header"))?;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(1, "bad header")))
            .collect::<Result<_>>()?;
        let [n, _dim] = h[..] else {
            return Err(bad(1, "header must be `n dim`"));
        };
        let rows = lines
            .map(|(i, l)| {
                l.split_whitespace()
                    .map(|t| t.parse::<f32>().map_err(|_| bad(i + 1, "bad value")))
                    .collect::<Result<Vec<f32>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != n {
            return Err(Error::RowCount {
                expected: n,
                found: rows.len(),
            });
        }
        Self::from_rows(&rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Cosine similarity clipped at zero.
    #[inline]
    pub fn similarity(&self, i: usize, j: usize) -> f32 {
        let s: f32 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
        s.max(0.0)
    }

    pub fn write_to(&self, mut out: impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for i in 0..self.len() {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacilityLocationOutcome {
    pub selected: Vec<usize>,
    /// False when the deadline expired before the budget was filled.
    pub completed: bool,
    pub evaluations: u64,
    pub elapsed_secs: f64,
}

const CHUNK: usize = 4096;

struct Coverage<'a> {
    emb: &'a PointEmbeddings,
    best: Vec<f32>,
}

impl Coverage<'_> {
    /// `Σ_i max(0, sim(i, c) − best_i)`, summed chunkwise in index order.
    fn gain(&self, c: usize) -> f64 {
        let n = self.best.len();
        let partials: Vec<f64> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let lo = chunk * CHUNK;
                let hi = (lo + CHUNK).min(n);
                (lo..hi)
                    .map(|i| (self.emb.similarity(i, c) - self.best[i]).max(0.0) as f64)
                    .sum::<f64>()
            })
            .collect();
        partials.iter().sum()
    }

    fn absorb(&mut self, c: usize) {
        let emb = self.emb;
        self.best
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, b)| *b = b.max(emb.similarity(i, c)));
    }
}

/// Lazy greedy on `α·Σ quality + (1 − α)·Σ_i max_{j∈S} sim(i, j)`.
///
/// Every evaluation touches every pool point, so the cost grows with
/// `pool²`. `deadline` bounds wall time; on expiry the partial selection is
/// returned with `completed = false`.
pub fn facility_location_select(
    points: &[DataPoint],
    emb: &PointEmbeddings,
    budget: usize,
    alpha_mix: f64,
    deadline: Option<Duration>,
) -> Result<FacilityLocationOutcome> {
    check_budget(budget, points.len())?;
    if emb.len() != points.len() {
        return Err(Error::RowCount {
            expected: points.len(),
            found: emb.len(),
        });
    }
    if !(0.0..=1.0).contains(&alpha_mix) {
        return Err(Error::InvalidParameter(format!("alpha_mix {alpha_mix} outside [0, 1]")));
    }
    let start = Instant::now();
    let expired = AtomicBool::new(false);
    let out_of_time = || {
        deadline.is_some_and(|d| {
            let late = start.elapsed() > d;
            if late {
                expired.store(true, Ordering::Relaxed);
            }
            late
        })
    };
    let diversity = 1.0 - alpha_mix;
    let mut cover = Coverage {
        emb,
        best: vec![0.0; points.len()],
    };
    let score = |cover: &Coverage<'_>, c: usize| {
        let spread = if diversity > 0.0 { diversity * cover.gain(c) } else { 0.0 };
        alpha_mix * points[c].quality + spread
    };

    let initial: Vec<Option<(CandidateKey, usize)>> = (0..points.len())
        .into_par_iter()
        .map(|c| {
            if expired.load(Ordering::Relaxed) || out_of_time() {
                return None;
            }
            let key = CandidateKey {
                score: score(&cover, c),
                quality: points[c].quality,
                index: c,
            };
            Some((key, 0))
        })
        .collect();
    let mut evaluations = initial.iter().flatten().count() as u64;
    let finish = |selected, completed, evaluations| FacilityLocationOutcome {
        selected,
        completed,
        evaluations,
        elapsed_secs: start.elapsed().as_secs_f64(),
    };
    if expired.load(Ordering::Relaxed) {
        return Ok(finish(Vec::new(), false, evaluations));
    }

    let mut heap: BinaryHeap<HeapItem> = initial.into_iter().flatten().map(HeapItem).collect();
    let mut selected = Vec::with_capacity(budget);
    for iteration in 0..budget {
        let best = loop {
            if out_of_time() {
                return Ok(finish(selected, false, evaluations));
            }
            let HeapItem((key, stamp)) = heap
                .pop()
                .ok_or_else(|| Error::Invariant("facility-location heap exhausted".into()))?;
            if stamp == iteration {
                break key.index;
            }
            let fresh = CandidateKey {
                score: score(&cover, key.index),
                ..key
            };
            evaluations += 1;
            if heap.peek().is_none_or(|next| fresh >= next.0 .0) {
                break key.index;
            }
            heap.push(HeapItem((fresh, iteration)));
        };
        selected.push(best);
        if diversity > 0.0 {
            cover.absorb(best);
        }
    }
    Ok(finish(selected, true, evaluations))
}

#[derive(PartialEq, Eq)]
struct HeapItem((CandidateKey, usize));

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0 .0.cmp(&other.0 .0)
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(id: usize, quality: f64) -> DataPoint {
        DataPoint {
            id: format!("p{id}"),
            label_ids: vec![0],
            quality,
            payload: String::new(),
        }
    }

    #[test]
    fn random_is_seeded() {
        let a = random_select(100, 10, DEFAULT_RANDOM_SEED).unwrap();
        assert_eq!(a, random_select(100, 10, 42).unwrap());
        assert_ne!(a, random_select(100, 10, 43).unwrap());
        let mut all = random_select(7, 7, 1).unwrap();
        all.sort_unstable();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
        assert!(random_select(3, 4, 1).is_err());
    }

    #[test]
    fn quality_order() {
        let pts = vec![point(0, 1.0), point(1, 3.0), point(2, 3.0), point(3, 2.0)];
        assert_eq!(quality_top_n(&pts, 3).unwrap(), [1, 2, 3]);
    }

    fn line_embeddings(n: usize) -> PointEmbeddings {
        let rows: Vec<Vec<f32>> = (0..n)
            .map(|i| {
                let t = i as f32 * 0.4;
                vec![t.cos(), t.sin()]
            })
            .collect();
        PointEmbeddings::from_rows(&rows).unwrap()
    }

    #[test]
    fn pure_quality_mix_is_top_n() {
        let pts: Vec<DataPoint> = (0..8).map(|i| point(i, ((i * 5) % 8) as f64)).collect();
        let emb = line_embeddings(8);
        let out = facility_location_select(&pts, &emb, 3, 1.0, None).unwrap();
        assert!(out.completed);
        assert_eq!(out.selected, quality_top_n(&pts, 3).unwrap());
    }

    #[test]
    fn one_point_pool() {
        let pts = vec![point(0, 0.5)];
        let emb = line_embeddings(1);
        let out = facility_location_select(&pts, &emb, 1, 0.7, None).unwrap();
        assert_eq!(out.selected, [0]);
    }

    #[test]
    fn diversity_spreads_out() {
        // two tight clusters; equal qualities
        let rows = vec![
            vec![1.0, 0.0],
            vec![0.99, 0.01],
            vec![0.98, 0.02],
            vec![0.0, 1.0],
            vec![0.01, 0.99],
        ];
        let emb = PointEmbeddings::from_rows(&rows).unwrap();
        let pts: Vec<DataPoint> = (0..5).map(|i| point(i, 1.0)).collect();
        let out = facility_location_select(&pts, &emb, 2, 0.0, None).unwrap();
        let first_cluster = out.selected.iter().filter(|&&i| i < 3).count();
        assert_eq!(first_cluster, 1, "{:?}", out.selected);
    }

    #[test]
    fn errors_and_deadline() {
        let pts = vec![point(0, 1.0), point(1, 1.0)];
        assert!(facility_location_select(&pts, &line_embeddings(3), 1, 0.5, None).is_err());
        assert!(facility_location_select(&pts, &line_embeddings(2), 1, 1.5, None).is_err());
        let out = facility_location_select(&pts, &line_embeddings(2), 2, 0.5, Some(Duration::ZERO)).unwrap();
        assert!(!out.completed);
    }

    #[test]
    fn embeddings_text_round_trip() {
        let emb = line_embeddings(4);
        let mut buf = Vec::new();
        emb.write_to(&mut buf).unwrap();
        let back = PointEmbeddings::parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.len(), 4);
        for i in 0..4 {
            for (a, b) in back.row(i).iter().zip(emb.row(i)) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }
}
