//! Greedy information-gain selection.
//!
//! At every iteration the remaining candidate with the largest gain is moved
//! into the selection. Gains are either exact marginal increases of `E(D)` or
//! the first-order estimate `g · e_d`, where `g` is the gradient of `E` with
//! respect to the raw information sum.
//!
//! With `z = Aᵀx` (`x` the raw sum), `∂E/∂x_p = Σ_q a_pq φ′(z_q)`, so the
//! default [`GradientOrientation::Adjoint`] applies `A` to `φ′(z)`.
//! [`GradientOrientation::Literal`] instead evaluates `A φ′(A x)`, i.e. the
//! same matrix on both sides.
//!
//! Ties are broken by higher quality, then by smaller pool index.

mod lazy;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::DataPoint;
use crate::label_graph::Propagation;
use crate::measure::{information, InfoScore, InfoVector, DERIVATIVE_FLOOR};

pub use lazy::lazy_select;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GainMode {
    Exact,
    #[default]
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GradientOrientation {
    /// `A · φ′(Aᵀ x)`: the derivative of `E` with respect to `x`.
    #[default]
    Adjoint,
    /// `A · φ′(A x)`, as the gradient formula is usually written.
    Literal,
}

macro_rules! keyword_enum {
    ($ty:ty, $($text:literal => $variant:expr),+) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok($variant),)+
                    other => Err(Error::InvalidParameter(format!(
                        "unknown {} {other:?}", stringify!($ty)
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $variant { return f.write_str($text); })+
                unreachable!()
            }
        }
    };
}

keyword_enum!(GainMode, "exact" => GainMode::Exact, "gradient" => GainMode::Gradient);
keyword_enum!(
    GradientOrientation,
    "adjoint" => GradientOrientation::Adjoint,
    "literal" => GradientOrientation::Literal
);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub budget: usize,
    pub gain_mode: GainMode,
    pub orientation: GradientOrientation,
    pub lazy: bool,
    /// Floor for `φ′` arguments.
    pub epsilon: f64,
}

impl SamplerConfig {
    pub fn new(budget: usize) -> Self {
        SamplerConfig {
            budget,
            gain_mode: GainMode::Gradient,
            orientation: GradientOrientation::Adjoint,
            lazy: true,
            epsilon: DERIVATIVE_FLOOR,
        }
    }

    pub fn exact(budget: usize) -> Self {
        SamplerConfig {
            gain_mode: GainMode::Exact,
            ..SamplerConfig::new(budget)
        }
    }

    pub fn with_mode(mut self, mode: GainMode) -> Self {
        self.gain_mode = mode;
        self
    }

    pub fn with_lazy(mut self, lazy: bool) -> Self {
        self.lazy = lazy;
        self
    }

    pub fn with_orientation(mut self, orientation: GradientOrientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn validate(&self, pool_len: usize) -> Result<()> {
        if pool_len == 0 {
            return Err(Error::EmptyPool);
        }
        if self.budget == 0 || self.budget > pool_len {
            return Err(Error::InvalidBudget {
                budget: self.budget,
                pool: pool_len,
            });
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon {} must be positive",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Loop state: accumulated information plus the selected/remaining split.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState {
    raw: InfoVector,
    z: InfoVector,
    selected: Vec<usize>,
    remaining: Vec<bool>,
    remaining_count: usize,
}

impl SelectionState {
    pub fn new(pool_len: usize, label_count: usize) -> Self {
        SelectionState {
            raw: InfoVector::zeros(label_count),
            z: InfoVector::zeros(label_count),
            selected: Vec::new(),
            remaining: vec![true; pool_len],
            remaining_count: pool_len,
        }
    }

    /// Propagated information `z = Aᵀ Σ e` over the selection.
    pub fn z(&self) -> &InfoVector {
        &self.z
    }

    /// Unpropagated sum `Σ e` over the selection.
    pub fn raw(&self) -> &InfoVector {
        &self.raw
    }

    /// Pool indices in selection order.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn selected_ids<'a>(&'a self, points: &'a [DataPoint]) -> impl Iterator<Item = &'a str> {
        self.selected.iter().map(|&i| points[i].id.as_str())
    }

    pub fn is_remaining(&self, index: usize) -> bool {
        self.remaining[index]
    }

    pub fn remaining(&self) -> impl Iterator<Item = usize> + '_ {
        self.remaining
            .iter()
            .enumerate()
            .filter_map(|(i, &r)| r.then_some(i))
    }

    pub fn remaining_count(&self) -> usize {
        self.remaining_count
    }

    pub fn iteration(&self) -> usize {
        self.selected.len()
    }

    /// Moves `index` into the selection and refreshes the touched entries of `z`.
    ///
    /// Touched entries are recomputed from the raw sum, so `z` matches a
    /// from-scratch propagation of `raw` exactly.
    pub fn insert(&mut self, index: usize, d: &DataPoint, prop: &Propagation) -> Result<()> {
        if !self.remaining.get(index).copied().unwrap_or(false) {
            return Err(Error::Invariant(format!("point {index} is not a remaining candidate")));
        }
        self.remaining[index] = false;
        self.remaining_count -= 1;
        self.selected.push(index);
        let raw = self.raw.as_mut_slice();
        for &p in &d.label_ids {
            raw[p as usize] += d.quality;
        }
        let z = self.z.as_mut_slice();
        for &p in &d.label_ids {
            for (q, _) in prop.matrix().row_entries(p as usize) {
                z[q as usize] = column_dot(prop, q as usize, raw);
            }
        }
        Ok(())
    }
}

/// `Σ_p a_pq x_p`, summed in ascending `p`.
fn column_dot(prop: &Propagation, q: usize, x: &[f64]) -> f64 {
    prop.transpose()
        .row_entries(q)
        .fold(0.0, |acc, (p, a)| acc + a * x[p as usize])
}

/// `Σ_q a_pq v_q`, summed in ascending `q`.
fn row_dot(prop: &Propagation, p: usize, v: &[f64]) -> f64 {
    prop.matrix()
        .row_entries(p)
        .fold(0.0, |acc, (q, a)| acc + a * v[q as usize])
}

/// Propagated contribution `δ = Aᵀ e_d` as sorted `(label, mass)` pairs.
pub fn point_delta(prop: &Propagation, d: &DataPoint) -> Vec<(u32, f64)> {
    let mut parts: Vec<(u32, f64)> = d
        .label_ids
        .iter()
        .flat_map(|&p| prop.matrix().row_entries(p as usize))
        .collect();
    parts.sort_by_key(|e| e.0);
    let mut out: Vec<(u32, f64)> = Vec::with_capacity(parts.len());
    for (q, a) in parts {
        match out.last_mut() {
            Some(last) if last.0 == q => last.1 += a,
            _ => out.push((q, a)),
        }
    }
    for e in &mut out {
        e.1 *= d.quality;
    }
    out
}

/// `E(S ∪ {d}) − E(S)`.
pub fn exact_gain<F: InfoScore + ?Sized>(
    state: &SelectionState,
    d: &DataPoint,
    prop: &Propagation,
    f: &F,
) -> f64 {
    if d.quality == 0.0 {
        return 0.0;
    }
    let z = state.z.as_slice();
    point_delta(prop, d)
        .into_iter()
        .map(|(q, delta)| {
            let zq = z[q as usize];
            f.value(zq + delta) - f.value(zq)
        })
        .sum()
}

/// First-order gain `g · e_d`.
pub fn gradient_gain<F: InfoScore + ?Sized>(
    state: &SelectionState,
    d: &DataPoint,
    prop: &Propagation,
    f: &F,
    orientation: GradientOrientation,
    epsilon: f64,
) -> f64 {
    let z = state.z.as_slice();
    let raw = state.raw.as_slice();
    let dphi = |q: usize| {
        let zq = match orientation {
            GradientOrientation::Adjoint => z[q],
            GradientOrientation::Literal => row_dot(prop, q, raw),
        };
        f.derivative(zq.max(epsilon))
    };
    let g_sum: f64 = d
        .label_ids
        .iter()
        .map(|&p| {
            prop.matrix()
                .row_entries(p as usize)
                .fold(0.0, |acc, (q, a)| acc + a * dphi(q as usize))
        })
        .sum();
    d.quality * g_sum
}

/// Incrementally maintained scorer shared by the plain and lazy loops.
///
/// Gradient entries are recomputed from scratch for every label touched by a
/// selection, which keeps them bit-identical to [`gradient_gain`].
pub(crate) struct Scorer<'a, F: ?Sized> {
    prop: &'a Propagation,
    f: &'a F,
    mode: GainMode,
    orientation: GradientOrientation,
    epsilon: f64,
    inner: Vec<f64>,
    dphi: Vec<f64>,
    gradient: Vec<f64>,
}

impl<'a, F: InfoScore + ?Sized> Scorer<'a, F> {
    pub(crate) fn new(prop: &'a Propagation, f: &'a F, cfg: &SamplerConfig) -> Self {
        let k = prop.label_count();
        let mut scorer = Scorer {
            prop,
            f,
            mode: cfg.gain_mode,
            orientation: cfg.orientation,
            epsilon: cfg.epsilon,
            inner: vec![0.0; k],
            dphi: Vec::new(),
            gradient: Vec::new(),
        };
        if cfg.gain_mode == GainMode::Gradient {
            scorer.dphi = (0..k).map(|q| scorer.derivative_at(q)).collect();
            scorer.gradient = (0..k).map(|p| row_dot(prop, p, &scorer.dphi)).collect();
        }
        scorer
    }

    fn derivative_at(&self, q: usize) -> f64 {
        self.f.derivative(self.inner[q].max(self.epsilon))
    }

    pub(crate) fn score(&self, state: &SelectionState, d: &DataPoint) -> f64 {
        match self.mode {
            GainMode::Exact => exact_gain(state, d, self.prop, self.f),
            GainMode::Gradient => {
                let g: f64 = d.label_ids.iter().map(|&p| self.gradient[p as usize]).sum();
                d.quality * g
            }
        }
    }

    /// Refreshes gradient entries after `d` was inserted into `state`.
    pub(crate) fn commit(&mut self, state: &SelectionState, d: &DataPoint) {
        if self.mode != GainMode::Gradient {
            return;
        }
        let prop = self.prop;
        let mut touched: Vec<u32> = Vec::new();
        for &r in &d.label_ids {
            let cols = match self.orientation {
                GradientOrientation::Adjoint => prop.matrix().row(r as usize).0,
                GradientOrientation::Literal => prop.transpose().row(r as usize).0,
            };
            touched.extend_from_slice(cols);
        }
        touched.sort_unstable();
        touched.dedup();
        for &q in &touched {
            let q = q as usize;
            self.inner[q] = match self.orientation {
                GradientOrientation::Adjoint => state.z.as_slice()[q],
                GradientOrientation::Literal => row_dot(prop, q, state.raw.as_slice()),
            };
            self.dphi[q] = self.derivative_at(q);
        }
        let mut rows: Vec<u32> = touched
            .iter()
            .flat_map(|&q| prop.transpose().row(q as usize).0.iter().copied())
            .collect();
        rows.sort_unstable();
        rows.dedup();
        for p in rows {
            self.gradient[p as usize] = row_dot(prop, p as usize, &self.dphi);
        }
    }
}

/// Total order used to pick the winner among candidates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CandidateKey {
    pub score: f64,
    pub quality: f64,
    pub index: usize,
}

impl PartialEq for CandidateKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CandidateKey {}

impl PartialOrd for CandidateKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CandidateKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| self.quality.total_cmp(&other.quality))
            .then_with(|| other.index.cmp(&self.index))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub index: usize,
    pub id: String,
    /// Score under the configured gain mode.
    pub score: f64,
    pub exact_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub final_info: f64,
    pub per_label_info: Vec<f64>,
    pub label_histogram: Vec<u64>,
    pub covered_labels: usize,
    pub label_count: usize,
    pub coverage: f64,
    pub mean_quality: f64,
    pub evaluations: u64,
    pub elapsed_secs: f64,
    pub config: SamplerConfig,
    pub trace: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub state: SelectionState,
    pub report: SelectionReport,
}

impl Selection {
    pub fn indices(&self) -> &[usize] {
        self.state.selected()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.report.trace.iter().map(|r| r.id.as_str()).collect()
    }
}

/// Runs [`lazy_select`] or [`select`] according to `cfg.lazy`.
pub fn run<F: InfoScore + ?Sized>(
    points: &[DataPoint],
    prop: &Propagation,
    f: &F,
    cfg: &SamplerConfig,
) -> Result<Selection> {
    if cfg.lazy {
        lazy_select(points, prop, f, cfg)
    } else {
        select(points, prop, f, cfg)
    }
}

pub(crate) fn check_points(points: &[DataPoint], prop: &Propagation) -> Result<()> {
    let k = prop.label_count();
    for d in points {
        if d.label_ids.last().is_some_and(|&l| l as usize >= k) {
            return Err(Error::InvalidParameter(format!(
                "point {:?} references a label outside the graph's {k} labels",
                d.id
            )));
        }
    }
    Ok(())
}

/// Plain greedy: every remaining candidate is scored at every iteration.
pub fn select<F: InfoScore + ?Sized>(
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
    let mut candidates: Vec<usize> = (0..points.len()).collect();
    let mut trace = Vec::with_capacity(cfg.budget);
    let mut evaluations = 0u64;

    for iteration in 0..cfg.budget {
        let best = candidates
            .par_iter()
            .map(|&i| CandidateKey {
                score: scorer.score(&state, &points[i]),
                quality: points[i].quality,
                index: i,
            })
            .max()
            .ok_or_else(|| Error::Invariant("candidate pool exhausted".into()))?;
        evaluations += candidates.len() as u64;
        let pos = candidates
            .iter()
            .position(|&i| i == best.index)
            .ok_or_else(|| Error::Invariant("winner missing from candidates".into()))?;
        candidates.swap_remove(pos);
        trace.push(commit(&mut state, &mut scorer, points, prop, f, best, iteration)?);
    }
    Ok(finish(points, prop, f, cfg, state, trace, evaluations, start))
}

pub(crate) fn commit<F: InfoScore + ?Sized>(
    state: &mut SelectionState,
    scorer: &mut Scorer<'_, F>,
    points: &[DataPoint],
    prop: &Propagation,
    f: &F,
    best: CandidateKey,
    iteration: usize,
) -> Result<IterationRecord> {
    let d = &points[best.index];
    let gain = match scorer.mode {
        GainMode::Exact => best.score,
        GainMode::Gradient => exact_gain(state, d, prop, f),
    };
    state.insert(best.index, d, prop)?;
    scorer.commit(state, d);
    Ok(IterationRecord {
        iteration,
        index: best.index,
        id: d.id.clone(),
        score: best.score,
        exact_gain: gain,
    })
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn finish<F: InfoScore + ?Sized>(
    points: &[DataPoint],
    prop: &Propagation,
    f: &F,
    cfg: &SamplerConfig,
    state: SelectionState,
    trace: Vec<IterationRecord>,
    evaluations: u64,
    start: Instant,
) -> Selection {
    let k = prop.label_count();
    let mut histogram = vec![0u64; k];
    let mut quality = 0.0;
    for &i in state.selected() {
        quality += points[i].quality;
        for &l in &points[i].label_ids {
            histogram[l as usize] += 1;
        }
    }
    let covered = histogram.iter().filter(|&&c| c > 0).count();
    let n = state.selected().len().max(1) as f64;
    let report = SelectionReport {
        final_info: information(f, state.z().as_slice()),
        per_label_info: state.z().as_slice().to_vec(),
        label_histogram: histogram,
        covered_labels: covered,
        label_count: k,
        coverage: if k == 0 { 0.0 } else { covered as f64 / k as f64 },
        mean_quality: quality / n,
        evaluations,
        elapsed_secs: start.elapsed().as_secs_f64(),
        config: *cfg,
        trace,
    };
    Selection { state, report }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label_graph::LabelGraph;
    use crate::measure::{accumulate, dataset_info, propagate, InfoFunction};

    pub(crate) fn point(id: &str, labels: &[u32], quality: f64) -> DataPoint {
        DataPoint {
            id: id.into(),
            label_ids: labels.to_vec(),
            quality,
            payload: String::new(),
        }
    }

    fn three_points() -> Vec<DataPoint> {
        vec![point("d1", &[0], 1.0), point("d2", &[0], 1.0), point("d3", &[1], 0.8)]
    }

    #[test]
    fn exact_gain_examples() {
        let prop = Propagation::identity(2);
        let f = InfoFunction::default_power();
        let mut state = SelectionState::new(3, 2);
        state.insert(0, &point("x", &[0], 1.0), &prop).unwrap();
        let gain = exact_gain(&state, &point("y", &[1], 0.8), &prop, &f);
        assert!((gain - 0.8365).abs() < 1e-4);
        assert_eq!(exact_gain(&state, &point("y", &[1], 0.0), &prop, &f), 0.0);

        let empty = SelectionState::new(1, 2);
        let g = exact_gain(&empty, &point("y", &[1], 2.5), &prop, &InfoFunction::Linear);
        assert_eq!(g, 2.5);
    }

    #[test]
    fn gradient_gain_examples() {
        let prop = Propagation::identity(2);
        let f = InfoFunction::default_power();
        let mut state = SelectionState::new(3, 2);
        state.insert(0, &point("x", &[0], 1.0), &prop).unwrap();
        let d = point("y", &[0], 1.0);
        let g = gradient_gain(&state, &d, &prop, &f, GradientOrientation::Adjoint, 1e-12);
        assert!((g - 0.8).abs() < 1e-12);
        let zero = point("y", &[0, 1], 0.0);
        assert_eq!(gradient_gain(&state, &zero, &prop, &f, GradientOrientation::Adjoint, 1e-12), 0.0);
    }

    #[test]
    fn linear_gradient_equals_exact() {
        let g = LabelGraph::from_edges(3, 0.5, &[(0, 1, 0.9), (1, 2, 0.7)]).unwrap();
        let prop = g.propagation(1.0).unwrap();
        let mut state = SelectionState::new(4, 3);
        state.insert(3, &point("x", &[1], 2.0), &prop).unwrap();
        for d in [point("a", &[0], 1.0), point("b", &[0, 2], 0.4), point("c", &[1, 2], 3.0)] {
            let exact = exact_gain(&state, &d, &prop, &InfoFunction::Linear);
            let grad = gradient_gain(&state, &d, &prop, &InfoFunction::Linear, GradientOrientation::Adjoint, 1e-12);
            assert!((exact - grad).abs() < 1e-12, "{exact} vs {grad}");
        }
    }

    #[test]
    fn three_point_fixture() {
        let pts = three_points();
        let prop = Propagation::identity(2);
        let f = InfoFunction::default_power();
        for mode in [GainMode::Exact, GainMode::Gradient] {
            for lazy in [false, true] {
                let cfg = SamplerConfig::new(2).with_mode(mode).with_lazy(lazy);
                let sel = run(&pts, &prop, &f, &cfg).unwrap();
                assert_eq!(sel.ids(), ["d1", "d3"], "{mode} lazy={lazy}");
                assert!((sel.report.final_info - 1.8365).abs() < 1e-4);
            }
        }
        let sel = select(&pts, &prop, &f, &SamplerConfig::exact(2)).unwrap();
        let scores: Vec<f64> = sel.report.trace.iter().map(|r| r.score).collect();
        assert_eq!(scores[0], 1.0);
        assert!((scores[1] - 0.8365).abs() < 1e-4);
    }

    #[test]
    fn full_budget_takes_everything() {
        let pts = three_points();
        let prop = Propagation::identity(2);
        let f = InfoFunction::default_power();
        let sel = select(&pts, &prop, &f, &SamplerConfig::new(3)).unwrap();
        assert_eq!(sel.indices().len(), 3);
        assert!((sel.report.final_info - dataset_info(&pts, &prop, &f)).abs() < 1e-12);
        assert_eq!(sel.state.remaining_count(), 0);
        assert_eq!(sel.report.coverage, 1.0);
    }

    #[test]
    fn budget_validation() {
        let pts = three_points();
        let prop = Propagation::identity(2);
        let f = InfoFunction::default_power();
        assert!(matches!(
            select(&pts, &prop, &f, &SamplerConfig::new(4)),
            Err(Error::InvalidBudget { budget: 4, pool: 3 })
        ));
        assert!(matches!(
            lazy_select(&pts, &prop, &f, &SamplerConfig::new(0)),
            Err(Error::InvalidBudget { .. })
        ));
        assert!(matches!(select(&[], &prop, &f, &SamplerConfig::new(1)), Err(Error::EmptyPool)));
        let bad = [point("x", &[5], 1.0)];
        assert!(select(&bad, &prop, &f, &SamplerConfig::new(1)).is_err());
    }

    #[test]
    fn state_matches_recomputation() {
        let g = LabelGraph::from_edges(4, 0.5, &[(0, 1, 0.9), (1, 2, 0.7), (2, 3, 0.6)]).unwrap();
        let prop = g.propagation(1.2).unwrap();
        let pts = vec![
            point("a", &[0], 1.0),
            point("b", &[1, 3], 2.0),
            point("c", &[2], 0.3),
            point("d", &[0, 2], 1.1),
            point("e", &[3], 0.9),
        ];
        let f = InfoFunction::default_power();
        let sel = select(&pts, &prop, &f, &SamplerConfig::new(4)).unwrap();
        let chosen: Vec<&DataPoint> = sel.indices().iter().map(|&i| &pts[i]).collect();
        let z = propagate(&prop, &accumulate(chosen.iter().copied(), 4)).unwrap();
        for (a, b) in z.as_slice().iter().zip(sel.state.z().as_slice()) {
            assert!((a - b).abs() < 1e-7);
        }
        let ids: Vec<&str> = sel.state.selected_ids(&pts).collect();
        assert_eq!(ids, sel.ids());
        assert_eq!(sel.state.remaining().count(), 1);
    }

    #[test]
    fn tie_break_prefers_quality_then_index() {
        let prop = Propagation::identity(3);
        // equal linear gains of 2.0
        let pts = vec![point("a", &[0, 1], 1.0), point("b", &[2], 2.0), point("c", &[2], 2.0)];
        let sel = select(&pts, &prop, &InfoFunction::Linear, &SamplerConfig::new(1)).unwrap();
        assert_eq!(sel.ids(), ["b"]);
    }

    #[test]
    fn keyword_enums_parse() {
        assert_eq!("Exact".parse::<GainMode>().unwrap(), GainMode::Exact);
        assert_eq!(GainMode::Gradient.to_string(), "gradient");
        assert_eq!("literal".parse::<GradientOrientation>().unwrap(), GradientOrientation::Literal);
        assert!("other".parse::<GainMode>().is_err());
    }
}
