//! Information measurement over the label graph.
//!
//! A point with quality `s` and labels `L` carries raw information `s` on each
//! label in `L`. Propagation moves that mass along graph edges, and a dataset
//! is worth `E(D) = Σ_k φ(z_k)` where `z` is the propagated sum over `D` and
//! `φ` is increasing and concave.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::DataPoint;
use crate::label_graph::Propagation;

/// Floor applied to the argument of `φ′` wherever the derivative is singular at 0.
pub const DERIVATIVE_FLOOR: f64 = 1e-12;

/// A scalar score function usable by the measure.
///
/// Implementations are expected to be increasing with `value(0) = 0`. The
/// shipped ones are also concave; the trait does not enforce it so the
/// verification harness can exercise deliberately convex functions.
pub trait InfoScore: Sync {
    fn value(&self, x: f64) -> f64;

    /// Derivative at `x`. May be infinite at `x = 0`.
    fn derivative(&self, x: f64) -> f64;
}

/// The concave score functions `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InfoFunction {
    /// `x^a`, `0 < a < 1`.
    Power { exponent: f64 },
    /// `1 − e^{−a·x}`, `a > 0`.
    ExpSaturate { rate: f64 },
    Linear,
}

impl InfoFunction {
    pub fn power(exponent: f64) -> Result<Self> {
        if exponent > 0.0 && exponent < 1.0 {
            Ok(InfoFunction::Power { exponent })
        } else {
            Err(Error::InvalidParameter(format!(
                "power exponent {exponent} outside (0, 1)"
            )))
        }
    }

    pub fn exp_saturate(rate: f64) -> Result<Self> {
        if rate > 0.0 && rate.is_finite() {
            Ok(InfoFunction::ExpSaturate { rate })
        } else {
            Err(Error::InvalidParameter(format!("saturation rate {rate} must be positive")))
        }
    }

    /// `x^0.8`.
    pub fn default_power() -> Self {
        InfoFunction::Power { exponent: 0.8 }
    }

    /// The functions every verification suite runs against.
    pub fn shipped() -> Vec<InfoFunction> {
        vec![
            InfoFunction::Power { exponent: 0.8 },
            InfoFunction::Power { exponent: 0.5 },
            InfoFunction::ExpSaturate { rate: 0.1 },
            InfoFunction::Linear,
        ]
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, InfoFunction::Linear)
    }
}

impl Default for InfoFunction {
    fn default() -> Self {
        InfoFunction::default_power()
    }
}

impl InfoScore for InfoFunction {
    #[inline]
    fn value(&self, x: f64) -> f64 {
        match *self {
            InfoFunction::Power { exponent } => x.powf(exponent),
            InfoFunction::ExpSaturate { rate } => -(-rate * x).exp_m1(),
            InfoFunction::Linear => x,
        }
    }

    #[inline]
    fn derivative(&self, x: f64) -> f64 {
        match *self {
            InfoFunction::Power { exponent } => exponent * x.powf(exponent - 1.0),
            InfoFunction::ExpSaturate { rate } => rate * (-rate * x).exp(),
            InfoFunction::Linear => 1.0,
        }
    }
}

impl fmt::Display for InfoFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfoFunction::Power { exponent } => write!(f, "power:{exponent}"),
            InfoFunction::ExpSaturate { rate } => write!(f, "exp:{rate}"),
            InfoFunction::Linear => f.write_str("linear"),
        }
    }
}

impl FromStr for InfoFunction {
    type Err = Error;

    /// Accepts `power[:<a>]`, `exp:<a>` and `linear`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown score function {s:?}"));
        let (kind, param) = match s.split_once(':') {
            Some((k, p)) => {
                let p = p.trim().parse::<f64>().map_err(|_| bad())?;
                (k.trim(), Some(p))
            }
            None => (s.trim(), None),
        };
        match (kind.to_ascii_lowercase().as_str(), param) {
            ("power", p) => InfoFunction::power(p.unwrap_or(0.8)),
            ("exp", Some(p)) => InfoFunction::exp_saturate(p),
            ("linear", None) => Ok(InfoFunction::Linear),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for InfoFunction {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InfoFunction> for String {
    fn from(f: InfoFunction) -> String {
        f.to_string()
    }
}

/// `φ(x)`, rejecting negative arguments.
pub fn phi_value<F: InfoScore + ?Sized>(f: &F, x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::InvalidParameter(format!("score argument {x} is negative")));
    }
    Ok(f.value(x))
}

/// `φ′(x)`, rejecting negative arguments. Where the derivative is singular
/// (`Power` at 0) the argument is floored at [`DERIVATIVE_FLOOR`].
pub fn phi_derivative<F: InfoScore + ?Sized>(f: &F, x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::InvalidParameter(format!("score argument {x} is negative")));
    }
    let d = f.derivative(x);
    Ok(if d.is_finite() { d } else { f.derivative(x.max(DERIVATIVE_FLOOR)) })
}

/// Nonnegative per-label information vector.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoVector(Vec<f64>);

impl InfoVector {
    pub fn zeros(k: usize) -> Self {
        InfoVector(vec![0.0; k])
    }

    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!("information entry {v} is negative")));
        }
        Ok(InfoVector(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    fn add_point(&mut self, d: &DataPoint) {
        for &l in &d.label_ids {
            self.0[l as usize] += d.quality;
        }
    }
}

/// `e = s·v`: the point's quality on each of its labels.
pub fn raw_info(d: &DataPoint, k: usize) -> InfoVector {
    let mut e = InfoVector::zeros(k);
    e.add_point(d);
    e
}

/// Raw information summed over `points` in iteration order.
pub fn accumulate<'a, I>(points: I, k: usize) -> InfoVector
where
    I: IntoIterator<Item = &'a DataPoint>,
{
    let mut sum = InfoVector::zeros(k);
    for d in points {
        sum.add_point(d);
    }
    sum
}

/// Moves each label's mass along its propagation row: `ê_q = Σ_p a_pq e_p`.
pub fn propagate(prop: &Propagation, e: &InfoVector) -> Result<InfoVector> {
    if e.len() != prop.label_count() {
        return Err(Error::LengthMismatch {
            expected: prop.label_count(),
            found: e.len(),
        });
    }
    Ok(InfoVector(prop.push(e.as_slice())))
}

/// `Σ_k φ(z_k)` for an already propagated vector.
pub fn information<F: InfoScore + ?Sized>(f: &F, z: &[f64]) -> f64 {
    z.iter().map(|&v| f.value(v)).sum()
}

/// `E(D)`. Duplicates count with multiplicity; the empty set is worth 0.
pub fn dataset_info<'a, I, F>(points: I, prop: &Propagation, f: &F) -> f64
where
    I: IntoIterator<Item = &'a DataPoint>,
    F: InfoScore + ?Sized,
{
    let sum = accumulate(points, prop.label_count());
    information(f, &prop.push(sum.as_slice()))
}
