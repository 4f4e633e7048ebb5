//! Exhaustive optimum and randomized submodularity checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingestion::DataPoint;
use crate::label_graph::Propagation;
use crate::measure::{dataset_info, InfoScore};

/// Largest number of subsets [`brute_force_optimum`] will enumerate.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;
/// Slack allowed on the diminishing-returns inequality.
pub const SUBMODULARITY_TOLERANCE: f64 = 1e-9;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    /// Pool indices, ascending.
    pub indices: Vec<usize>,
    pub value: f64,
}

fn subset_value<F: InfoScore + ?Sized>(
    points: &[DataPoint],
    subset: &[usize],
    prop: &Propagation,
    f: &F,
) -> f64 {
    dataset_info(subset.iter().map(|&i| &points[i]), prop, f)
}

fn sorted_ids<'a>(points: &'a [DataPoint], subset: &[usize]) -> Vec<&'a str> {
    let mut ids: Vec<&str> = subset.iter().map(|&i| points[i].id.as_str()).collect();
    ids.sort_unstable();
    ids
}

/// Best size-`budget` subset by enumeration. Values within `1e-12` relative
/// count as tied; ties go to the lexicographically smallest sorted id list.
pub fn brute_force_optimum<F: InfoScore + ?Sized>(
    points: &[DataPoint],
    prop: &Propagation,
    f: &F,
    budget: usize,
) -> Result<Optimum> {
    let n = points.len();
    if budget == 0 || budget > n {
        return Err(Error::InvalidBudget { budget, pool: n });
    }
    let subsets = binomial(n, budget);
    if subsets > ENUMERATION_LIMIT {
        return Err(Error::InstanceTooLarge {
            subsets,
            limit: ENUMERATION_LIMIT,
        });
    }

    let mut combo: Vec<usize> = (0..budget).collect();
    let mut best = Optimum {
        indices: combo.clone(),
        value: subset_value(points, &combo, prop, f),
    };
    while advance(&mut combo, n) {
        let value = subset_value(points, &combo, prop, f);
        let tol = 1e-12 * best.value.abs().max(1.0);
        let better = if value > best.value + tol {
            true
        } else if value >= best.value - tol {
            sorted_ids(points, &combo) < sorted_ids(points, &best.indices)
        } else {
            false
        };
        if better {
            best = Optimum {
                indices: combo.clone(),
                value,
            };
        }
    }
    Ok(best)
}

/// Next combination in lexicographic order; false once exhausted.
fn advance(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularityReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest observed `(E(D∪e)−E(D)) − (E(T∪e)−E(T))`.
    pub worst_margin: f64,
}

impl SubmodularityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Largest pool [`check_submodularity`] accepts.
pub const SUBMODULARITY_POOL_LIMIT: usize = 50;

/// Draws nested pairs `D ⊆ T`, `e ∉ T` and checks diminishing returns.
///
/// Each trial picks `e` uniformly, puts every other point in `T` with
/// probability 1/2 and every member of `T` in `D` with probability 1/2.
/// Trials are seeded individually from `seed`, so results do not depend on
/// thread count.
pub fn check_submodularity<F: InfoScore + ?Sized>(
    points: &[DataPoint],
    prop: &Propagation,
    f: &F,
    trials: usize,
    seed: u64,
) -> Result<SubmodularityReport> {
    let n = points.len();
    if n == 0 || n > SUBMODULARITY_POOL_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "submodularity check needs 1..={SUBMODULARITY_POOL_LIMIT} points, got {n}"
        )));
    }
    let margins: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let e = rng.random_range(0..n);
            let outer: Vec<usize> = (0..n).filter(|&i| i != e && rng.random_bool(0.5)).collect();
            let inner: Vec<usize> = outer.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            let gain = |set: &[usize]| {
                let with: Vec<usize> = set.iter().copied().chain([e]).collect();
                subset_value(points, &with, prop, f) - subset_value(points, set, prop, f)
            };
            gain(&inner) - gain(&outer)
        })
        .collect();
    Ok(SubmodularityReport {
        trials,
        violations: margins.iter().filter(|&&m| m < -SUBMODULARITY_TOLERANCE).count(),
        worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::InfoFunction;

    fn point(id: &str, labels: &[u32], quality: f64) -> DataPoint {
        DataPoint {
            id: id.into(),
            label_ids: labels.to_vec(),
            quality,
            payload: String::new(),
        }
    }

    struct Square;

    impl InfoScore for Square {
        fn value(&self, x: f64) -> f64 {
            x * x
        }
        fn derivative(&self, x: f64) -> f64 {
            2.0 * x
        }
    }

    #[test]
    fn combinations_enumerate_in_order() {
        let mut c = vec![0, 1];
        let mut all = vec![c.clone()];
        while advance(&mut c, 4) {
            all.push(c.clone());
        }
        assert_eq!(all.len(), 6);
        assert_eq!(all.last().unwrap(), &[2, 3]);
        assert_eq!(binomial(12, 4), 495);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn three_point_optimum() {
        let pts = vec![point("d1", &[0], 1.0), point("d2", &[0], 1.0), point("d3", &[1], 0.8)];
        let prop = Propagation::identity(2);
        let f = InfoFunction::default_power();
        let opt = brute_force_optimum(&pts, &prop, &f, 2).unwrap();
        assert_eq!(opt.indices, [0, 2]);
        assert!((opt.value - 1.8365).abs() < 1e-4);
        // hand check of the alternatives
        let d1d2 = 2f64.powf(0.8);
        let d2d3 = 1.0 + 0.8f64.powf(0.8);
        assert!(d1d2 < opt.value && (d2d3 - opt.value).abs() < 1e-15);

        let all = brute_force_optimum(&pts, &prop, &f, 3).unwrap();
        assert_eq!(all.indices, [0, 1, 2]);
    }

    #[test]
    fn identical_points_pick_first_ids() {
        let pts: Vec<DataPoint> = ["e", "b", "d", "a", "c"]
            .iter()
            .map(|id| point(id, &[0, 1], 1.0))
            .collect();
        let prop = Propagation::identity(2);
        let opt = brute_force_optimum(&pts, &prop, &InfoFunction::default_power(), 2).unwrap();
        assert_eq!(sorted_ids(&pts, &opt.indices), ["a", "b"]);
    }

    #[test]
    fn guard_rejects_large_instances() {
        let pts: Vec<DataPoint> = (0..40).map(|i| point(&i.to_string(), &[0], 1.0)).collect();
        let prop = Propagation::identity(1);
        let err = brute_force_optimum(&pts, &prop, &InfoFunction::Linear, 10).unwrap_err();
        assert!(matches!(err, Error::InstanceTooLarge { .. }));
    }

    fn small_pool() -> Vec<DataPoint> {
        (0..20)
            .map(|i| point(&format!("p{i}"), &[(i % 3) as u32, 3 + (i % 2) as u32], 0.5 + (i as f64) * 0.13))
            .collect()
    }

    #[test]
    fn linear_is_modular() {
        let pts = small_pool();
        let r = check_submodularity(&pts, &Propagation::identity(5), &InfoFunction::Linear, 200, 1).unwrap();
        assert!(r.passed());
        assert!(r.worst_margin.abs() < 1e-12, "{}", r.worst_margin);
    }

    #[test]
    fn power_passes_and_square_fails() {
        let pts = small_pool();
        let prop = crate::label_graph::LabelGraph::from_edges(5, 0.5, &[(0, 1, 0.8), (2, 4, 0.6)])
            .unwrap()
            .propagation(1.0)
            .unwrap();
        let r = check_submodularity(&pts, &prop, &InfoFunction::default_power(), 500, 7).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = check_submodularity(&pts, &prop, &Square, 500, 7).unwrap();
        assert!(!r.passed());
        assert!(r.worst_margin < 0.0);
    }

    #[test]
    fn trials_are_reproducible() {
        let pts = small_pool();
        let prop = Propagation::identity(5);
        let f = InfoFunction::default_power();
        let a = check_submodularity(&pts, &prop, &f, 50, 3).unwrap();
        let b = check_submodularity(&pts, &prop, &f, 50, 3).unwrap();
        assert_eq!(a, b);
    }
}
