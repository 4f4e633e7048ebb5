use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use mig_core::artifact::{sha256_hex, GraphArtifact};
use mig_core::harness::compare::{
    classify_shape, compare_methods, sweep_alpha, sweep_threshold, Method, Shape, Sweep, ALPHA_GRID,
    THRESHOLD_GRID,
};
use mig_core::harness::synth::{generate_pool, SyntheticPoolSpec};
use mig_core::harness::PointEmbeddings;
use mig_core::ingestion::{label_key, load_embeddings, load_pool, normalize_labels, Remap};
use mig_core::measure::dataset_info;
use mig_core::{sampler, ErrorKind, LabelEmbeddings, LabelGraph, Pool, PoolFormat, Propagation};
use serde::Serialize;
use tracing_subscriber::EnvFilter;

use crate::config::{set_path, RunConfig};
use crate::{BaselineArgs, BaselineMethod, BenchArgs, BuildGraphArgs, ScoreArgs, SelectArgs, StatsArgs, SweepChoice};

/// Tolerance for calling two adjacent sweep values equal.
const SHAPE_TOLERANCE: f64 = 1e-9;

pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<mig_core::Error>() {
            return match err.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Io => 3,
                ErrorKind::Internal => 4,
            };
        }
        if cause.is::<std::io::Error>() {
            return 3;
        }
        if cause.is::<toml::de::Error>() {
            return 2;
        }
    }
    4
}

pub fn report_error(e: &anyhow::Error) -> ExitCode {
    // causes already spelled out by their wrapper are skipped
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let text = cause.to_string();
        if !msg.contains(&text) {
            msg = format!("{msg}: {text}");
        }
    }
    eprintln!("error: {msg}");
    ExitCode::from(exit_code(e))
}

pub fn init_logging(level: &str) {
    let filter = EnvFilter::try_from_default_env()
        .or_else(|_| EnvFilter::try_new(level))
        .unwrap_or_else(|_| EnvFilter::new("warn"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

pub fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!(mig_core::Error::InvalidParameter("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    Ok(())
}

fn validation(msg: impl Into<String>) -> anyhow::Error {
    mig_core::Error::InvalidParameter(msg.into()).into()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush().with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes())?;
    out.flush().with_context(|| format!("writing {}", path.display()))
}

fn load_pool_noting_exclusions(path: &Path) -> Result<Pool> {
    let pool = load_pool(path, PoolFormat::JsonLines)?;
    if !pool.excluded.is_empty() {
        eprintln!("excluded {} records without labels", pool.excluded.len());
    }
    Ok(pool)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn build_graph(mut cfg: RunConfig, args: BuildGraphArgs) -> Result<()> {
    set_path(&mut cfg.pool, &args.pool);
    set_path(&mut cfg.embeddings, &args.embeddings);
    set_path(&mut cfg.label_order, &args.label_order);
    set_path(&mut cfg.graph, &args.output);
    if args.min_freq.is_some() {
        cfg.min_freq = args.min_freq;
    }
    if args.merge_sim.is_some() {
        cfg.merge_sim = args.merge_sim;
    }
    let pool_path = RunConfig::require(&cfg.pool, "pool")?;
    let emb_path = RunConfig::require(&cfg.embeddings, "embeddings")?;
    let out_path = RunConfig::require(&cfg.graph, "output")?;
    if !(cfg.threshold > 0.0 && cfg.threshold <= 1.0) {
        return Err(validation(format!("threshold {} must be in (0, 1]", cfg.threshold)));
    }

    let pool = load_pool_noting_exclusions(pool_path)?;
    let emb = load_embeddings(emb_path, cfg.label_order.as_deref(), &pool.vocab)?;
    let emb_bytes = std::fs::read(emb_path).with_context(|| format!("reading {}", emb_path.display()))?;

    let (vocab, emb, remap) = if cfg.min_freq.is_some() || cfg.merge_sim.is_some() {
        let norm = normalize_labels(&pool.vocab, &emb, cfg.min_freq.unwrap_or(1), cfg.merge_sim.unwrap_or(1.0))?;
        eprintln!("normalized {} labels to {}", pool.label_count(), norm.vocab.len());
        (norm.vocab, norm.embeddings, norm.remap)
    } else {
        (pool.vocab.clone(), emb, Remap::identity(pool.label_count()))
    };
    if let Some(path) = &args.remap_out {
        let mut out = create(path)?;
        remap.write_table(&mut out, &pool.vocab, &vocab)?;
        out.flush()?;
    }

    let graph = LabelGraph::build(&emb, cfg.threshold)?;
    let alpha = cfg.alpha_or_default();
    let art = GraphArtifact::new(&pool.vocab, sha256_hex(&emb_bytes), &vocab, &remap, graph, alpha)?;
    art.propagation()?;
    art.save(out_path)?;
    println!("labels {}", art.graph.label_count());
    println!("edges {}", art.graph.edge_count());
    println!("density {:.6}", art.graph.density());
    println!("threshold {}", art.graph.threshold());
    println!("alpha {alpha}");
    Ok(())
}

/// Pool and artifact, with the pool aligned to the artifact's vocabulary.
fn load_aligned(pool_path: &Path, graph_path: &Path, force: bool) -> Result<(Pool, GraphArtifact)> {
    let pool = load_pool_noting_exclusions(pool_path)?;
    let art = GraphArtifact::load(graph_path)?;
    if let Err(e) = art.check_source(&pool) {
        if !force {
            return Err(anyhow::Error::new(e).context("graph was built from a different pool (use --force to override)"));
        }
        tracing::warn!("pool vocabulary differs from the graph's source; continuing");
    }
    let aligned = art.align_pool(&pool)?;
    if aligned.len() < pool.len() {
        eprintln!("{} records lost all labels after alignment", pool.len() - aligned.len());
    }
    Ok((aligned, art))
}

#[derive(Serialize)]
struct SelectOutput<'a> {
    config: &'a RunConfig,
    pool: PoolSummary,
    graph: GraphSummary,
    selected_ids: Vec<&'a str>,
    selection: &'a mig_core::SelectionReport,
}

#[derive(Serialize)]
struct PoolSummary {
    records: usize,
    excluded: usize,
    labels: usize,
}

#[derive(Serialize)]
struct GraphSummary {
    labels: usize,
    edges: usize,
    threshold: f64,
    alpha: f64,
    source_hash: String,
    embeddings_hash: String,
}

fn graph_summary(art: &GraphArtifact, alpha: f64) -> GraphSummary {
    GraphSummary {
        labels: art.graph.label_count(),
        edges: art.graph.edge_count(),
        threshold: art.graph.threshold(),
        alpha,
        source_hash: art.source_hash.clone(),
        embeddings_hash: art.embeddings_hash.clone(),
    }
}

fn propagation_for(cfg: &mut RunConfig, art: &GraphArtifact) -> Result<Propagation> {
    let alpha = *cfg.alpha.get_or_insert(art.alpha);
    cfg.threshold = art.graph.threshold();
    Ok(art.graph.propagation(alpha)?)
}

pub fn select(mut cfg: RunConfig, args: SelectArgs) -> Result<()> {
    set_path(&mut cfg.pool, &args.pool);
    set_path(&mut cfg.graph, &args.graph);
    set_path(&mut cfg.output, &args.output);
    set_path(&mut cfg.report, &args.report);
    if args.budget.is_some() {
        cfg.budget = args.budget;
    }
    let budget = cfg.budget.ok_or_else(|| validation("--budget is required"))?;
    let out_path = RunConfig::require(&cfg.output, "output")?.to_path_buf();
    let report_path = cfg.report.clone().unwrap_or_else(|| with_suffix(&out_path, ".report.json"));
    cfg.report = Some(report_path.clone());

    let (pool, art) = load_aligned(
        RunConfig::require(&cfg.pool, "pool")?,
        RunConfig::require(&cfg.graph, "graph")?,
        args.force,
    )?;
    let prop = propagation_for(&mut cfg, &art)?;
    let sampler_cfg = cfg.sampler(budget);
    let sel = sampler::run(&pool.points, &prop, &cfg.info_function, &sampler_cfg)?;

    let mut out = create(&out_path)?;
    for &i in sel.indices() {
        writeln!(out, "{}", pool.points[i].payload)?;
    }
    out.flush().with_context(|| format!("writing {}", out_path.display()))?;

    let report = SelectOutput {
        config: &cfg,
        pool: PoolSummary {
            records: pool.len(),
            excluded: pool.excluded.len(),
            labels: pool.label_count(),
        },
        graph: graph_summary(&art, prop.alpha()),
        selected_ids: sel.ids(),
        selection: &sel.report,
    };
    write_json(&report_path, &report)?;
    println!("selected {} of {} records", sel.indices().len(), pool.len());
    println!("E(D) {:.6}", sel.report.final_info);
    println!("coverage {:.4}", sel.report.coverage);
    Ok(())
}

#[derive(Serialize)]
struct ScoreOutput {
    records: usize,
    info: f64,
    coverage: f64,
    mean_quality: f64,
    alpha: f64,
    info_function: String,
}

pub fn score(mut cfg: RunConfig, args: ScoreArgs) -> Result<()> {
    set_path(&mut cfg.pool, &args.pool);
    set_path(&mut cfg.graph, &args.graph);
    let art = GraphArtifact::load(RunConfig::require(&cfg.graph, "graph")?)?;
    let target = match (&args.subset, &cfg.pool) {
        (Some(p), _) | (None, Some(p)) => p.clone(),
        (None, None) => return Err(validation("--pool or --subset is required")),
    };
    let pool = art.align_pool(&load_pool_noting_exclusions(&target)?)?;
    let prop = propagation_for(&mut cfg, &art)?;
    let all: Vec<usize> = (0..pool.len()).collect();
    let k = prop.label_count();
    let out = ScoreOutput {
        records: pool.len(),
        info: dataset_info(pool.points.iter(), &prop, &cfg.info_function),
        coverage: mig_core::harness::compare::label_coverage(&pool.points, &all, k),
        mean_quality: mig_core::harness::compare::mean_quality(&pool.points, &all),
        alpha: prop.alpha(),
        info_function: cfg.info_function.to_string(),
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("records {}", out.records);
        println!("E(D) {:.6}", out.info);
        println!("coverage {:.4}", out.coverage);
        println!("mean_quality {:.4}", out.mean_quality);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct QualitySummary {
    min: f64,
    mean: f64,
    median: f64,
    max: f64,
}

#[derive(Debug, Serialize)]
struct SelectionCoverage {
    records: usize,
    covered_labels: usize,
    pool_labels: usize,
    coverage: f64,
}

#[derive(Debug, Serialize)]
struct StatsOutput {
    records: usize,
    excluded: usize,
    labels: usize,
    quality: Option<QualitySummary>,
    histogram: Vec<(String, u64)>,
    selection: Option<SelectionCoverage>,
}

fn quality_summary(pool: &Pool) -> Option<QualitySummary> {
    let mut q: Vec<f64> = pool.points.iter().map(|p| p.quality).collect();
    if q.is_empty() {
        return None;
    }
    q.sort_by(f64::total_cmp);
    let n = q.len();
    let median = if n % 2 == 1 { q[n / 2] } else { (q[n / 2 - 1] + q[n / 2]) / 2.0 };
    Some(QualitySummary {
        min: q[0],
        mean: q.iter().sum::<f64>() / n as f64,
        median,
        max: q[n - 1],
    })
}

pub fn stats(mut cfg: RunConfig, args: StatsArgs) -> Result<()> {
    set_path(&mut cfg.pool, &args.pool);
    let pool = load_pool_noting_exclusions(RunConfig::require(&cfg.pool, "pool")?)?;
    let vocab = &pool.vocab;
    let mut histogram: Vec<(String, u64)> = vocab
        .labels()
        .iter()
        .cloned()
        .zip(vocab.frequencies().iter().copied())
        .collect();
    histogram.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if let Some(top) = args.top {
        histogram.truncate(top);
    }
    let selection = match &args.selection {
        Some(path) => {
            let sel = load_pool_noting_exclusions(path)?;
            let present: std::collections::HashSet<String> = sel.vocab.labels().iter().map(|l| label_key(l)).collect();
            let covered = vocab.labels().iter().filter(|l| present.contains(&label_key(l))).count();
            Some(SelectionCoverage {
                records: sel.len(),
                covered_labels: covered,
                pool_labels: vocab.len(),
                coverage: if vocab.is_empty() { 0.0 } else { covered as f64 / vocab.len() as f64 },
            })
        }
        None => None,
    };
    let out = StatsOutput {
        records: pool.len(),
        excluded: pool.excluded.len(),
        labels: vocab.len(),
        quality: quality_summary(&pool),
        histogram,
        selection,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    println!("records {} (excluded {})", out.records, out.excluded);
    println!("labels {}", out.labels);
    if let Some(q) = &out.quality {
        println!("quality min {} mean {:.4} median {} max {}", q.min, q.mean, q.median, q.max);
    }
    if let Some(s) = &out.selection {
        println!(
            "selection {} records, coverage {:.2}% ({}/{} labels)",
            s.records,
            100.0 * s.coverage,
            s.covered_labels,
            s.pool_labels
        );
    }
    println!("label histogram");
    let width = out.histogram.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
    for (label, count) in &out.histogram {
        println!("  {label:<width$}  {count}");
    }
    Ok(())
}

pub fn baseline(mut cfg: RunConfig, args: BaselineArgs) -> Result<()> {
    set_path(&mut cfg.pool, &args.pool);
    set_path(&mut cfg.graph, &args.graph);
    if args.budget.is_some() {
        cfg.budget = args.budget;
    }
    let budget = cfg.budget.ok_or_else(|| validation("--budget is required"))?;
    let (pool, art) = load_aligned(
        RunConfig::require(&cfg.pool, "pool")?,
        RunConfig::require(&cfg.graph, "graph")?,
        args.force,
    )?;
    let prop = propagation_for(&mut cfg, &art)?;
    let point_emb = if args.methods.contains(&BaselineMethod::FacilityLocation) {
        let path = args
            .point_embeddings
            .as_deref()
            .ok_or_else(|| validation("facility-location needs --point-embeddings"))?;
        Some(PointEmbeddings::load(path)?)
    } else {
        None
    };
    let deadline = match args.deadline_secs {
        Some(s) if !(s >= 0.0 && s.is_finite()) => return Err(validation("--deadline-secs must be nonnegative")),
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    let methods: Vec<Method<'_>> = args
        .methods
        .iter()
        .map(|m| match m {
            BaselineMethod::Mig => Method::Mig(cfg.sampler(budget)),
            BaselineMethod::Random => Method::Random { seed: cfg.seed },
            BaselineMethod::Quality => Method::QualityTopN,
            BaselineMethod::FacilityLocation => Method::FacilityLocation {
                embeddings: point_emb.as_ref().expect("loaded above"),
                alpha_mix: args.alpha_mix,
                deadline,
            },
        })
        .collect();
    let report = compare_methods(&pool.points, &prop, &cfg.info_function, budget, &methods)?;
    print!("{}", report.to_text());
    if let Some(path) = &args.csv {
        write_text(path, &report.to_csv())?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SeriesShapes {
    info: Shape,
    coverage: Shape,
    mean_self_retention: Shape,
    edges: Shape,
}

#[derive(Debug, Serialize)]
struct SweepOutput<'a> {
    sweep: &'a Sweep,
    shapes: SeriesShapes,
    /// Every reported series is monotone or has a single extremum.
    shapes_ok: bool,
    /// Self-retention falls along α; edge count never grows along T.
    structure_ok: bool,
}

#[derive(Debug, Serialize)]
struct BenchOutput<'a> {
    config: &'a RunConfig,
    source: String,
    points: usize,
    labels: usize,
    budget: usize,
    sweeps: Vec<SweepOutput<'a>>,
}

fn shapes_of(sweep: &Sweep) -> SeriesShapes {
    let c = |s: Vec<f64>| classify_shape(&s, SHAPE_TOLERANCE);
    SeriesShapes {
        info: c(sweep.series(|r| r.info)),
        coverage: c(sweep.series(|r| r.coverage)),
        mean_self_retention: c(sweep.series(|r| r.mean_self_retention)),
        edges: c(sweep.series(|r| r.edges as f64)),
    }
}

fn structure_holds(sweep: &Sweep) -> bool {
    let pairs = sweep.rows.windows(2);
    match sweep.axis {
        mig_core::harness::compare::SweepAxis::Alpha => pairs
            .into_iter()
            .all(|w| w[1].mean_self_retention < w[0].mean_self_retention || w[0].edges == 0),
        mig_core::harness::compare::SweepAxis::Threshold => pairs.into_iter().all(|w| w[1].edges <= w[0].edges),
    }
}

fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] < w[1])
}

pub fn bench(mut cfg: RunConfig, args: BenchArgs) -> Result<()> {
    cfg.budget = Some(args.budget);
    cfg.alpha = Some(cfg.alpha_or_default());
    set_path(&mut cfg.pool, &args.pool);
    set_path(&mut cfg.embeddings, &args.embeddings);
    let alphas = args.alphas.clone().unwrap_or_else(|| ALPHA_GRID.to_vec());
    let thresholds = args.thresholds.clone().unwrap_or_else(|| THRESHOLD_GRID.to_vec());
    if !strictly_increasing(&alphas) || !strictly_increasing(&thresholds) {
        return Err(validation("sweep grids must be strictly increasing"));
    }
    let (source, pool, emb): (String, Pool, LabelEmbeddings) = match (&cfg.pool, &cfg.embeddings) {
        (Some(p), Some(e)) => {
            let pool = load_pool_noting_exclusions(p)?;
            let emb = load_embeddings(e, None, &pool.vocab)?;
            (p.display().to_string(), pool, emb)
        }
        (None, None) => {
            let spec = SyntheticPoolSpec::new(args.points, args.labels, cfg.seed)
                .with_labels_per_point(args.min_labels, args.max_labels);
            let syn = generate_pool(&spec)?;
            (format!("synthetic(seed={})", cfg.seed), syn.pool, syn.label_embeddings)
        }
        _ => return Err(validation("--pool and --embeddings go together")),
    };
    let sampler_cfg = cfg.sampler(args.budget);
    sampler_cfg.validate(pool.len())?;
    let f = &cfg.info_function;

    let mut sweeps = Vec::new();
    if matches!(args.axis, SweepChoice::Alpha | SweepChoice::Both) {
        let graph = LabelGraph::build(&emb, cfg.threshold)?;
        sweeps.push(sweep_alpha(&pool.points, &graph, f, &sampler_cfg, &alphas)?);
    }
    if matches!(args.axis, SweepChoice::Threshold | SweepChoice::Both) {
        sweeps.push(sweep_threshold(&pool.points, &emb, cfg.alpha_or_default(), f, &sampler_cfg, &thresholds)?);
    }

    let outputs: Vec<SweepOutput<'_>> = sweeps
        .iter()
        .map(|s| {
            let shapes = shapes_of(s);
            let shapes_ok = [shapes.info, shapes.coverage, shapes.mean_self_retention, shapes.edges]
                .iter()
                .all(|sh| sh.is_monotone_or_unimodal());
            SweepOutput {
                sweep: s,
                shapes,
                shapes_ok,
                structure_ok: structure_holds(s),
            }
        })
        .collect();

    println!("{source}: {} points, {} labels, budget {}", pool.len(), pool.label_count(), args.budget);
    for o in &outputs {
        println!();
        print!("{}", o.sweep.to_text());
        println!(
            "shape: E(D) {:?}, coverage {:?}, mean_a_pp {:?}, edges {:?}; structure {}",
            o.shapes.info,
            o.shapes.coverage,
            o.shapes.mean_self_retention,
            o.shapes.edges,
            if o.structure_ok { "ok" } else { "VIOLATED" }
        );
    }
    if let Some(path) = &args.csv {
        let mut text = String::new();
        for (i, s) in sweeps.iter().enumerate() {
            let csv = s.to_csv();
            text.push_str(if i == 0 { &csv } else { csv.split_once('\n').map_or("", |(_, rest)| rest) });
        }
        write_text(path, &text)?;
    }
    if let Some(path) = &args.json {
        let out = BenchOutput {
            config: &cfg,
            source,
            points: pool.len(),
            labels: pool.label_count(),
            budget: args.budget,
            sweeps: outputs,
        };
        write_json(path, &out)?;
    }
    Ok(())
}
