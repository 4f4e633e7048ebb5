use mig_core::harness::random_instance;
use mig_core::label_graph::LabelGraph;
use mig_core::measure::{accumulate, dataset_info, propagate, InfoFunction};
use mig_core::Propagation;
use proptest::prelude::*;

/// Dense reference for the propagation matrix, straight from the weights.
fn dense_reference(graph: &LabelGraph, alpha: f64) -> Vec<Vec<f64>> {
    let k = graph.label_count();
    (0..k)
        .map(|p| {
            let total: f64 = (0..k).filter(|&q| q != p).map(|q| graph.weight(p, q)).sum();
            let denom = 1.0 + alpha * total;
            (0..k)
                .map(|q| if p == q { 1.0 / denom } else { alpha * graph.weight(p, q) / denom })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_matches_dense_formula(k in 1usize..14, t in 0.8f64..0.99, alpha in 0.0f64..3.0, seed in any::<u64>()) {
        let inst = random_instance(1, k, t, seed).unwrap();
        let prop = inst.graph.propagation(alpha).unwrap();
        let reference = dense_reference(&inst.graph, alpha);
        for (p, row) in reference.iter().enumerate() {
            for (q, want) in row.iter().enumerate() {
                prop_assert!((prop.entry(p, q) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rows_are_stochastic_and_mass_is_conserved(
        n in 1usize..30, k in 1usize..14, t in 0.8f64..0.99, alpha in 0.0f64..3.0, seed in any::<u64>()
    ) {
        let inst = random_instance(n, k, t, seed).unwrap();
        let prop = inst.graph.propagation(alpha).unwrap();
        for p in 0..k {
            let (_, vals) = prop.matrix().row(p);
            prop_assert!(vals.iter().all(|&v| v >= 0.0));
            prop_assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let e = accumulate(inst.points.iter(), k);
        let z = propagate(&prop, &e).unwrap();
        prop_assert!((z.total() - e.total()).abs() <= 1e-9 * e.total().max(1.0));
    }

    #[test]
    fn raising_alpha_lowers_self_retention(k in 2usize..14, t in 0.8f64..0.99, a in 0.0f64..3.0, da in 0.01f64..2.0, seed in any::<u64>()) {
        let inst = random_instance(1, k, t, seed).unwrap();
        let lo = inst.graph.propagation(a).unwrap();
        let hi = inst.graph.propagation(a + da).unwrap();
        for p in 0..k {
            let has_edge = inst.graph.weights().row(p).0.iter().any(|&q| q as usize != p);
            if has_edge {
                prop_assert!(hi.self_retention(p) < lo.self_retention(p));
            } else {
                prop_assert_eq!(hi.self_retention(p), 1.0);
            }
        }
    }

    #[test]
    fn raising_threshold_removes_edges(k in 2usize..14, t in 0.7f64..0.95, dt in 0.0f64..0.05, seed in any::<u64>()) {
        let inst = random_instance(1, k, t, seed).unwrap();
        let tighter = LabelGraph::build(&inst.embeddings, (t + dt).min(1.0)).unwrap();
        prop_assert!(tighter.edge_count() <= inst.graph.edge_count());
        for (p, q, w) in tighter.edges() {
            prop_assert_eq!(inst.graph.weight(p as usize, q as usize), w);
        }
    }

    #[test]
    fn graph_is_symmetric_and_thresholded(k in 1usize..14, t in 0.8f64..0.99, seed in any::<u64>()) {
        let inst = random_instance(1, k, t, seed).unwrap();
        for p in 0..k {
            prop_assert_eq!(inst.graph.weight(p, p), 0.0);
            for q in 0..k {
                let w = inst.graph.weight(p, q);
                prop_assert_eq!(w, inst.graph.weight(q, p));
                prop_assert!(w == 0.0 || (t..=1.0).contains(&w));
            }
        }
    }

    #[test]
    fn adding_a_point_never_lowers_information(n in 2usize..25, k in 1usize..12, alpha in 0.0f64..2.0, seed in any::<u64>()) {
        let inst = random_instance(n, k, 0.9, seed).unwrap();
        let prop = inst.graph.propagation(alpha).unwrap();
        for f in InfoFunction::shipped() {
            let mut prev = 0.0;
            for m in 1..=n {
                let e = dataset_info(inst.points[..m].iter(), &prop, &f);
                prop_assert!(e >= prev - 1e-12, "{f}: {e} < {prev}");
                prev = e;
            }
        }
    }

    #[test]
    fn push_and_pull_are_adjoint(k in 1usize..14, alpha in 0.0f64..3.0, seed in any::<u64>(), x in prop::collection::vec(0.0f64..5.0, 14), y in prop::collection::vec(-2.0f64..2.0, 14)) {
        let inst = random_instance(1, k, 0.88, seed).unwrap();
        let prop = inst.graph.propagation(alpha).unwrap();
        let e = mig_core::InfoVector::from_vec(x[..k].to_vec()).unwrap();
        let z = propagate(&prop, &e).unwrap();
        let back = prop.pull(&y[..k]);
        let lhs: f64 = z.as_slice().iter().zip(&y[..k]).map(|(a, b)| a * b).sum();
        let rhs: f64 = x[..k].iter().zip(&back).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }
}

#[test]
fn alpha_zero_is_exact_identity() {
    for seed in 0..20 {
        let inst = random_instance(1, 10, 0.85, seed).unwrap();
        let prop = inst.graph.propagation(0.0).unwrap();
        assert_eq!(prop.matrix(), Propagation::identity(10).matrix());
    }
}
