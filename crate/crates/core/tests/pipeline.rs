use mig_core::artifact::{sha256_hex, GraphArtifact};
use mig_core::harness::synth::{generate_pool, SyntheticPoolSpec};
use mig_core::ingestion::{load_embeddings, load_pool, normalize_labels, Remap};
use mig_core::{sampler, InfoFunction, LabelGraph, PoolFormat, SamplerConfig};
use proptest::prelude::*;

#[test]
fn files_to_selection() {
    let dir = tempfile::tempdir().unwrap();
    let syn = generate_pool(&SyntheticPoolSpec::new(800, 60, 21)).unwrap();
    let files = syn.write_to_dir(dir.path()).unwrap();

    let pool = load_pool(&files.pool, PoolFormat::JsonLines).unwrap();
    let emb = load_embeddings(&files.label_embeddings, None, &pool.vocab).unwrap();
    let graph = LabelGraph::build(&emb, 0.9).unwrap();
    let emb_hash = sha256_hex(&std::fs::read(&files.label_embeddings).unwrap());
    let art = GraphArtifact::new(&pool.vocab, emb_hash, &pool.vocab, &Remap::identity(pool.label_count()), graph, 1.0)
        .unwrap();
    let path = dir.path().join("graph.mig");
    art.save(&path).unwrap();
    let loaded = GraphArtifact::load(&path).unwrap();
    assert_eq!(loaded, art);
    loaded.check_source(&pool).unwrap();

    let prop = loaded.propagation().unwrap();
    let f = InfoFunction::default_power();
    let a = sampler::run(&pool.points, &prop, &f, &SamplerConfig::new(80)).unwrap();
    let b = sampler::run(&syn.pool.points, &syn_prop(&syn), &f, &SamplerConfig::new(80)).unwrap();
    assert_eq!(a.indices(), b.indices());
}

fn syn_prop(syn: &mig_core::harness::SyntheticPool) -> mig_core::Propagation {
    LabelGraph::build(&syn.label_embeddings, 0.9).unwrap().propagation(1.0).unwrap()
}

#[test]
fn normalized_pool_selects_over_merged_labels() {
    let syn = generate_pool(&SyntheticPoolSpec::new(500, 50, 3)).unwrap();
    let norm = normalize_labels(&syn.pool.vocab, &syn.label_embeddings, 5, 0.95).unwrap();
    assert!(norm.vocab.len() <= syn.pool.label_count());
    let pool = syn.pool.relabel(&norm.remap, &norm.vocab).unwrap();
    assert_eq!(pool.label_count(), norm.vocab.len());
    let freq: u64 = pool.vocab.frequencies().iter().sum();
    assert!(freq > 0);
    let graph = LabelGraph::build(&norm.embeddings, 0.9).unwrap();
    let prop = graph.propagation(1.0).unwrap();
    let sel = sampler::run(&pool.points, &prop, &InfoFunction::default_power(), &SamplerConfig::new(25)).unwrap();
    assert_eq!(sel.indices().len(), 25);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>(), min_freq in 1u64..6, merge in 0.85f64..1.0) {
        let syn = generate_pool(&SyntheticPoolSpec::new(300, 40, seed)).unwrap();
        let once = normalize_labels(&syn.pool.vocab, &syn.label_embeddings, min_freq, merge).unwrap();
        let twice = normalize_labels(&once.vocab, &once.embeddings, min_freq, merge).unwrap();
        prop_assert!(twice.remap.is_identity());
        prop_assert_eq!(twice.vocab.labels(), once.vocab.labels());
        prop_assert_eq!(twice.embeddings, once.embeddings);
    }

    #[test]
    fn artifact_rebuild_is_byte_identical(seed in any::<u64>(), t in 0.8f64..0.99, alpha in 0.0f64..2.0) {
        let syn = generate_pool(&SyntheticPoolSpec::new(100, 30, seed)).unwrap();
        let build = || {
            let graph = LabelGraph::build(&syn.label_embeddings, t).unwrap();
            GraphArtifact::new(&syn.pool.vocab, "00".repeat(32), &syn.pool.vocab, &Remap::identity(syn.pool.label_count()), graph, alpha)
                .unwrap()
                .render()
        };
        let text = build();
        prop_assert_eq!(&text, &build());
        prop_assert_eq!(GraphArtifact::parse(&text).unwrap().render(), text);
    }
}
