//! Side-by-side method comparison and parameter sweeps.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::baselines::{facility_location_select, quality_top_n, random_select, PointEmbeddings};
use crate::error::Result;
use crate::ingestion::{DataPoint, LabelEmbeddings};
use crate::label_graph::{LabelGraph, Propagation};
use crate::measure::{dataset_info, InfoScore};
use crate::sampler::{self, SamplerConfig};

/// α grid for the propagation-strength sweep.
pub const ALPHA_GRID: [f64; 6] = [0.0, 0.6, 0.8, 1.0, 1.2, 2.0];
/// Threshold grid for the edge-density sweep.
pub const THRESHOLD_GRID: [f64; 8] = [0.80, 0.82, 0.84, 0.86, 0.88, 0.90, 0.92, 0.94];

#[derive(Debug, Clone)]
pub enum Method<'a> {
    Mig(SamplerConfig),
    Random { seed: u64 },
    QualityTopN,
    FacilityLocation {
        embeddings: &'a PointEmbeddings,
        alpha_mix: f64,
        deadline: Option<Duration>,
    },
}

impl Method<'_> {
    pub fn name(&self) -> String {
        match self {
            Method::Mig(cfg) => format!("mig-{}", cfg.gain_mode),
            Method::Random { seed } => format!("random(seed={seed})"),
            Method::QualityTopN => "quality-top-n".into(),
            Method::FacilityLocation { alpha_mix, .. } => format!("facility-location(α={alpha_mix})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    /// Points actually selected; below the budget when a deadline cut the run short.
    pub selected: usize,
    pub info: f64,
    pub coverage: f64,
    pub mean_quality: f64,
    pub wall_secs: f64,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub budget: usize,
    pub pool_size: usize,
    pub label_count: usize,
    pub rows: Vec<ComparisonRow>,
}

/// Distinct raw labels among `subset`, as a fraction of `k`.
pub fn label_coverage(points: &[DataPoint], subset: &[usize], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let mut seen = vec![false; k];
    for &i in subset {
        for &l in &points[i].label_ids {
            seen[l as usize] = true;
        }
    }
    seen.iter().filter(|&&s| s).count() as f64 / k as f64
}

pub fn mean_quality(points: &[DataPoint], subset: &[usize]) -> f64 {
    if subset.is_empty() {
        return 0.0;
    }
    subset.iter().map(|&i| points[i].quality).sum::<f64>() / subset.len() as f64
}

fn row<F: InfoScore + ?Sized>(
    method: String,
    points: &[DataPoint],
    prop: &Propagation,
    f: &F,
    subset: &[usize],
    wall_secs: f64,
    completed: bool,
) -> ComparisonRow {
    ComparisonRow {
        method,
        selected: subset.len(),
        info: dataset_info(subset.iter().map(|&i| &points[i]), prop, f),
        coverage: label_coverage(points, subset, prop.label_count()),
        mean_quality: mean_quality(points, subset),
        wall_secs,
        completed,
    }
}

/// Runs every method on the same pool, graph and budget; rows follow `methods`.
pub fn compare_methods<F: InfoScore + ?Sized>(
    points: &[DataPoint],
    prop: &Propagation,
    f: &F,
    budget: usize,
    methods: &[Method<'_>],
) -> Result<ComparisonReport> {
    let mut rows = Vec::with_capacity(methods.len());
    for method in methods {
        let start = Instant::now();
        let (subset, completed) = match method {
            Method::Mig(cfg) => {
                let cfg = SamplerConfig { budget, ..*cfg };
                (sampler::run(points, prop, f, &cfg)?.indices().to_vec(), true)
            }
            Method::Random { seed } => (random_select(points.len(), budget, *seed)?, true),
            Method::QualityTopN => (quality_top_n(points, budget)?, true),
            Method::FacilityLocation {
                embeddings,
                alpha_mix,
                deadline,
            } => {
                let out = facility_location_select(points, embeddings, budget, *alpha_mix, *deadline)?;
                (out.selected, out.completed)
            }
        };
        let secs = start.elapsed().as_secs_f64();
        tracing::info!(method = %method.name(), secs, "method finished");
        rows.push(row(method.name(), points, prop, f, &subset, secs, completed));
    }
    Ok(ComparisonReport {
        budget,
        pool_size: points.len(),
        label_count: prop.label_count(),
        rows,
    })
}

fn fmt_num(v: f64) -> String {
    format!("{v:.4}")
}

impl ComparisonReport {
    pub fn row(&self, method_prefix: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.method.starts_with(method_prefix))
    }

    pub fn to_text(&self) -> String {
        let header = ["method", "selected", "E(D)", "coverage", "mean_quality", "wall_s", "completed"];
        let body: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.method.clone(),
                    r.selected.to_string(),
                    fmt_num(r.info),
                    fmt_num(r.coverage),
                    fmt_num(r.mean_quality),
                    format!("{:.3}", r.wall_secs),
                    r.completed.to_string(),
                ]
            })
            .collect();
        let mut out = format!(
            "pool {} points, {} labels, budget {}\n",
            self.pool_size, self.label_count, self.budget
        );
        align(&mut out, &header.map(String::from), &body);
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,selected,info,coverage,mean_quality,wall_secs,completed\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                csv_field(&r.method),
                r.selected,
                r.info,
                r.coverage,
                r.mean_quality,
                r.wall_secs,
                r.completed
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn align<const N: usize>(out: &mut String, header: &[String; N], body: &[[String; N]]) {
    let mut widths: [usize; N] = std::array::from_fn(|i| header[i].chars().count());
    for r in body {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    for r in std::iter::once(header).chain(body) {
        let cells: Vec<String> = r
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Alpha,
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub edges: usize,
    pub density: f64,
    /// Mean diagonal of the propagation matrix.
    pub mean_self_retention: f64,
    pub info: f64,
    pub coverage: f64,
    pub mean_quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

fn sweep_row<F: InfoScore + ?Sized>(
    value: f64,
    graph: &LabelGraph,
    prop: &Propagation,
    points: &[DataPoint],
    f: &F,
    cfg: &SamplerConfig,
) -> Result<SweepRow> {
    let sel = sampler::run(points, prop, f, cfg)?;
    let k = prop.label_count();
    let retention = (0..k).map(|p| prop.self_retention(p)).sum::<f64>() / k.max(1) as f64;
    Ok(SweepRow {
        value,
        edges: graph.edge_count(),
        density: graph.density(),
        mean_self_retention: retention,
        info: sel.report.final_info,
        coverage: sel.report.coverage,
        mean_quality: sel.report.mean_quality,
    })
}

/// Selects at each α on a fixed graph.
pub fn sweep_alpha<F: InfoScore + ?Sized>(
    points: &[DataPoint],
    graph: &LabelGraph,
    f: &F,
    cfg: &SamplerConfig,
    alphas: &[f64],
) -> Result<Sweep> {
    let rows = alphas
        .iter()
        .map(|&a| sweep_row(a, graph, &graph.propagation(a)?, points, f, cfg))
        .collect::<Result<_>>()?;
    Ok(Sweep {
        axis: SweepAxis::Alpha,
        rows,
    })
}

/// Rebuilds the graph at each threshold with fixed α.
pub fn sweep_threshold<F: InfoScore + ?Sized>(
    points: &[DataPoint],
    embeddings: &LabelEmbeddings,
    alpha: f64,
    f: &F,
    cfg: &SamplerConfig,
    thresholds: &[f64],
) -> Result<Sweep> {
    let rows = thresholds
        .iter()
        .map(|&t| {
            let graph = LabelGraph::build(embeddings, t)?;
            sweep_row(t, &graph, &graph.propagation(alpha)?, points, f, cfg)
        })
        .collect::<Result<_>>()?;
    Ok(Sweep {
        axis: SweepAxis::Threshold,
        rows,
    })
}

impl Sweep {
    pub fn series(&self, pick: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(pick).collect()
    }

    pub fn to_text(&self) -> String {
        let axis = match self.axis {
            SweepAxis::Alpha => "alpha",
            SweepAxis::Threshold => "threshold",
        };
        let header = [axis, "edges", "density", "mean_a_pp", "E(D)", "coverage", "mean_quality"].map(String::from);
        let body: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    format!("{}", r.value),
                    r.edges.to_string(),
                    format!("{:.5}", r.density),
                    fmt_num(r.mean_self_retention),
                    fmt_num(r.info),
                    fmt_num(r.coverage),
                    fmt_num(r.mean_quality),
                ]
            })
            .collect();
        let mut out = String::new();
        align(&mut out, &header, &body);
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis,value,edges,density,mean_self_retention,info,coverage,mean_quality\n");
        let axis = serde_json::to_value(self.axis).expect("axis serializes");
        let axis = axis.as_str().unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{axis},{},{},{},{},{},{},{}",
                r.value, r.edges, r.density, r.mean_self_retention, r.info, r.coverage, r.mean_quality
            );
        }
        out
    }
}

/// Coarse shape of a series, with differences below `tol` treated as flat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Constant,
    Increasing,
    Decreasing,
    /// Rises then falls.
    Peak,
    /// Falls then rises.
    Valley,
    Irregular,
}

impl Shape {
    pub fn is_monotone_or_unimodal(self) -> bool {
        self != Shape::Irregular
    }
}

pub fn classify_shape(series: &[f64], tol: f64) -> Shape {
    let signs: Vec<i8> = series
        .windows(2)
        .filter_map(|w| {
            let d = w[1] - w[0];
            let scale = w[0].abs().max(w[1].abs()).max(1.0);
            if d.abs() <= tol * scale {
                None
            } else {
                Some(if d > 0.0 { 1 } else { -1 })
            }
        })
        .collect();
    let mut runs = signs.clone();
    runs.dedup();
    match runs.as_slice() {
        [] => Shape::Constant,
        [1] => Shape::Increasing,
        [-1] => Shape::Decreasing,
        [1, -1] => Shape::Peak,
        [-1, 1] => Shape::Valley,
        _ => Shape::Irregular,
    }
}
