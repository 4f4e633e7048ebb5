//! Seeded synthetic pools with clustered label geometry.
//!
//! Labels are assigned round-robin to clusters; each label embedding is its
//! cluster center plus Gaussian noise, so within-cluster similarities sit
//! near the usual thresholds and cross-cluster ones near zero. Each point has
//! a home cluster and draws most of its labels from it.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::baselines::PointEmbeddings;
use crate::error::{Error, Result};
use crate::ingestion::{parse_pool, sidecar_path, DataPoint, LabelEmbeddings, LabelId, Pool, PoolFormat};
use crate::label_graph::LabelGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum QualityDistribution {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
    /// Normal, clipped at zero.
    Normal { mean: f64, std_dev: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPoolSpec {
    pub n_points: usize,
    pub n_labels: usize,
    /// Labels per point, uniform over this inclusive range.
    pub min_labels: usize,
    pub max_labels: usize,
    pub quality: QualityDistribution,
    pub embedding_dim: usize,
    pub n_clusters: usize,
    /// Per-coordinate noise around the cluster center.
    pub cluster_spread: f64,
    /// Probability that a label is drawn from the point's home cluster.
    pub in_cluster_prob: f64,
    pub point_embedding_dim: usize,
    pub seed: u64,
}

impl SyntheticPoolSpec {
    /// Small default shape: 1000 points over 100 labels.
    pub fn new(n_points: usize, n_labels: usize, seed: u64) -> Self {
        SyntheticPoolSpec {
            n_points,
            n_labels,
            min_labels: 1,
            max_labels: 5,
            quality: QualityDistribution::Uniform { low: 1.0, high: 5.0 },
            embedding_dim: 32,
            n_clusters: n_labels.div_ceil(10).max(1),
            cluster_spread: 0.05,
            in_cluster_prob: 0.75,
            point_embedding_dim: 64,
            seed,
        }
    }

    pub fn with_labels_per_point(mut self, min: usize, max: usize) -> Self {
        self.min_labels = min;
        self.max_labels = max;
        self
    }

    pub fn with_quality(mut self, quality: QualityDistribution) -> Self {
        self.quality = quality;
        self
    }

    pub fn mean_labels(&self) -> f64 {
        (self.min_labels + self.max_labels) as f64 / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("synthetic spec: {what}")));
        if self.n_points == 0 || self.n_labels == 0 {
            return bad("n_points and n_labels must be positive");
        }
        if self.min_labels == 0 || self.min_labels > self.max_labels {
            return bad("labels per point must satisfy 1 ≤ min ≤ max");
        }
        if self.max_labels > self.n_labels {
            return bad("max labels per point exceeds n_labels");
        }
        if self.embedding_dim == 0 || self.point_embedding_dim == 0 {
            return bad("embedding dimensions must be positive");
        }
        if self.n_clusters == 0 || self.n_clusters > self.n_labels {
            return bad("n_clusters must be in 1..=n_labels");
        }
        if !(self.cluster_spread >= 0.0 && self.cluster_spread.is_finite()) {
            return bad("cluster_spread must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.in_cluster_prob) {
            return bad("in_cluster_prob must be in [0, 1]");
        }
        let ok = match self.quality {
            QualityDistribution::Constant { value } => value >= 0.0 && value.is_finite(),
            QualityDistribution::Uniform { low, high } => 0.0 <= low && low <= high && high.is_finite(),
            QualityDistribution::Normal { mean, std_dev } => {
                mean.is_finite() && std_dev >= 0.0 && std_dev.is_finite()
            }
        };
        if !ok {
            return bad("quality distribution parameters out of range");
        }
        Ok(())
    }
}

pub fn label_name(i: usize) -> String {
    format!("label-{i:05}")
}

#[derive(Debug, Clone)]
pub struct SyntheticPool {
    pub spec: SyntheticPoolSpec,
    /// The JSON-lines text `pool` was parsed from.
    pub text: String,
    pub pool: Pool,
    /// Row-aligned with `pool.vocab`.
    pub label_embeddings: LabelEmbeddings,
    /// Row-aligned with `pool.points`.
    pub point_embeddings: PointEmbeddings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeStats {
    pub points: usize,
    pub labels_used: usize,
    pub mean_labels: f64,
    pub min_labels: usize,
    pub max_labels: usize,
    pub mean_quality: f64,
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn noisy(rng: &mut ChaCha8Rng, center: &[f64], spread: f64) -> Vec<f64> {
    let noise = Normal::new(0.0, spread).expect("validated spread");
    let v: Vec<f64> = center.iter().map(|c| c + noise.sample(rng)).collect();
    if v.iter().all(|x| *x == 0.0) {
        center.to_vec()
    } else {
        v
    }
}

/// Generates a pool deterministically from `spec`.
pub fn generate_pool(spec: &SyntheticPoolSpec) -> Result<SyntheticPool> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let centers: Vec<Vec<f64>> = (0..spec.n_clusters)
        .map(|_| random_unit(&mut rng, spec.embedding_dim))
        .collect();
    let members: Vec<Vec<usize>> = (0..spec.n_clusters)
        .map(|c| (c..spec.n_labels).step_by(spec.n_clusters).collect())
        .collect();
    let label_rows: Vec<Vec<f64>> = (0..spec.n_labels)
        .map(|l| noisy(&mut rng, &centers[l % spec.n_clusters], spec.cluster_spread))
        .collect();
    let point_centers: Vec<Vec<f64>> = (0..spec.n_clusters)
        .map(|_| random_unit(&mut rng, spec.point_embedding_dim))
        .collect();

    let width = spec.n_points.to_string().len();
    let mut text = String::with_capacity(spec.n_points * 80);
    let mut point_rows: Vec<Vec<f32>> = Vec::with_capacity(spec.n_points);
    let mut chosen = Vec::with_capacity(spec.max_labels);
    for i in 0..spec.n_points {
        let home = rng.random_range(0..spec.n_clusters);
        let count = rng.random_range(spec.min_labels..=spec.max_labels);
        chosen.clear();
        while chosen.len() < count {
            let home_full = members[home].iter().all(|m| chosen.contains(m));
            let l = if !home_full && rng.random_bool(spec.in_cluster_prob) {
                *members[home].choose(&mut rng).expect("clusters are non-empty")
            } else {
                rng.random_range(0..spec.n_labels)
            };
            if !chosen.contains(&l) {
                chosen.push(l);
            }
        }
        let quality = match spec.quality {
            QualityDistribution::Constant { value } => value,
            QualityDistribution::Uniform { low, high } if low == high => low,
            QualityDistribution::Uniform { low, high } => rng.random_range(low..high),
            QualityDistribution::Normal { mean, std_dev } => {
                let z: f64 = StandardNormal.sample(&mut rng);
                (mean + std_dev * z).max(0.0)
            }
        };
        // four decimals keeps the file compact and round-trips exactly
        let quality = (quality * 1e4).round() / 1e4;
        let record = serde_json::json!({
            "id": format!("syn-{i:0width$}"),
            "instruction": format!("synthetic instruction {i}"),
            "labels": chosen.iter().map(|&l| label_name(l)).collect::<Vec<_>>(),
            "quality": quality,
        });
        text.push_str(&record.to_string());
        text.push('\n');
        let spread = spec.cluster_spread.max(0.05) * 4.0;
        point_rows.push(
            noisy(&mut rng, &point_centers[home], spread)
                .into_iter()
                .map(|x| x as f32)
                .collect(),
        );
    }

    let pool = parse_pool(&text, PoolFormat::JsonLines)?;
    let order: Vec<usize> = pool
        .vocab
        .labels()
        .iter()
        .map(|name| {
            name.strip_prefix("label-")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| Error::Invariant(format!("unexpected synthetic label {name:?}")))
        })
        .collect::<Result<_>>()?;
    let label_embeddings =
        LabelEmbeddings::from_rows(order.iter().map(|&l| label_rows[l].clone()).collect(), pool.vocab.labels())?;
    let point_embeddings = PointEmbeddings::from_rows(&point_rows)?;
    Ok(SyntheticPool {
        spec: spec.clone(),
        text,
        pool,
        label_embeddings,
        point_embeddings,
    })
}

impl SyntheticPool {
    pub fn shape(&self) -> ShapeStats {
        let counts = self.pool.points.iter().map(|p| p.label_ids.len());
        let n = self.pool.len().max(1) as f64;
        ShapeStats {
            points: self.pool.len(),
            labels_used: self.pool.label_count(),
            mean_labels: counts.clone().sum::<usize>() as f64 / n,
            min_labels: counts.clone().min().unwrap_or(0),
            max_labels: counts.max().unwrap_or(0),
            mean_quality: self.pool.points.iter().map(|p| p.quality).sum::<f64>() / n,
        }
    }

    /// Checks the generated pool against the shape its `SyntheticPoolSpec` asked for.
    pub fn self_check(&self) -> Result<ShapeStats> {
        let s = self.shape();
        let spec = &self.spec;
        let mean_tol = 4.0 * ((spec.max_labels - spec.min_labels) as f64 + 1.0) / (s.points as f64).sqrt();
        let problems = [
            (s.points != spec.n_points, "point count"),
            (s.labels_used > spec.n_labels, "label count"),
            ((s.mean_labels - spec.mean_labels()).abs() > mean_tol.max(1e-9), "mean labels per point"),
            (s.min_labels < spec.min_labels || s.max_labels > spec.max_labels, "labels-per-point range"),
        ];
        match problems.iter().find(|(bad, _)| *bad) {
            Some((_, what)) => Err(Error::Invariant(format!("synthetic pool {what} does not match its parameters: {s:?}"))),
            None => Ok(s),
        }
    }

    /// Writes `pool.jsonl`, `labels.emb` (+ sidecar) and `points.emb` into `dir`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<SyntheticFiles> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = SyntheticFiles {
            pool: dir.join("pool.jsonl"),
            label_embeddings: dir.join("labels.emb"),
            point_embeddings: dir.join("points.emb"),
        };
        std::fs::write(&files.pool, &self.text).map_err(|e| Error::io(&files.pool, e))?;
        write_file(&files.label_embeddings, |out| self.label_embeddings.write_to(out))?;
        let sidecar = sidecar_path(&files.label_embeddings);
        let names = self.pool.vocab.labels().join("\n") + "\n";
        std::fs::write(&sidecar, names).map_err(|e| Error::io(&sidecar, e))?;
        write_file(&files.point_embeddings, |out| self.point_embeddings.write_to(out))?;
        Ok(files)
    }
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    body(&mut out).and_then(|()| out.flush()).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticFiles {
    pub pool: PathBuf,
    pub label_embeddings: PathBuf,
    pub point_embeddings: PathBuf,
}

/// A small random pool over a random thresholded label graph.
#[derive(Debug, Clone)]
pub struct SmallInstance {
    pub points: Vec<DataPoint>,
    pub embeddings: LabelEmbeddings,
    pub graph: LabelGraph,
}

/// Draws `n_points` points with 1 to 3 labels each over `n_labels` labels
/// whose embeddings are random directions in a low-dimensional positive
/// orthant, so that thresholds around 0.9 leave a mix of edges and gaps.
pub fn random_instance(n_points: usize, n_labels: usize, threshold: f64, seed: u64) -> Result<SmallInstance> {
    if n_points == 0 || n_labels == 0 {
        return Err(Error::InvalidParameter("random instance needs points and labels".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n_labels)
        .map(|_| (0..3).map(|_| rng.random_range(0.05..1.0)).collect())
        .collect();
    let names: Vec<String> = (0..n_labels).map(label_name).collect();
    let embeddings = LabelEmbeddings::from_rows(rows, &names)?;
    let graph = LabelGraph::build(&embeddings, threshold)?;
    let points = (0..n_points)
        .map(|i| {
            let count = rng.random_range(1..=3.min(n_labels));
            let mut labels: Vec<LabelId> = rand::seq::index::sample(&mut rng, n_labels, count)
                .into_iter()
                .map(|l| l as LabelId)
                .collect();
            labels.sort_unstable();
            DataPoint {
                id: format!("p{i:03}"),
                label_ids: labels,
                quality: (rng.random_range(0.1..2.0) * 1e4f64).round() / 1e4,
                payload: String::new(),
            }
        })
        .collect();
    Ok(SmallInstance {
        points,
        embeddings,
        graph,
    })
}
