//! Run configuration: built-in defaults, overridden by a TOML file, overridden by flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mig_core::label_graph::{DEFAULT_ALPHA, DEFAULT_THRESHOLD};
use mig_core::measure::DERIVATIVE_FLOOR;
use mig_core::{GainMode, GradientOrientation, InfoFunction, SamplerConfig};
use serde::{Deserialize, Serialize};

/// Everything that determines a run's outputs. Echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pool: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub label_order: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub threshold: f64,
    /// Unset means "the artifact's α" when selecting, the default α when building.
    pub alpha: Option<f64>,
    pub info_function: InfoFunction,
    pub budget: Option<usize>,
    pub gain_mode: GainMode,
    pub orientation: GradientOrientation,
    pub lazy: bool,
    pub epsilon: f64,
    pub min_freq: Option<u64>,
    pub merge_sim: Option<f64>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub log_level: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pool: None,
            embeddings: None,
            label_order: None,
            graph: None,
            output: None,
            report: None,
            threshold: DEFAULT_THRESHOLD,
            alpha: None,
            info_function: InfoFunction::default_power(),
            budget: None,
            gain_mode: GainMode::default(),
            orientation: GradientOrientation::default(),
            lazy: true,
            epsilon: DERIVATIVE_FLOOR,
            min_freq: None,
            merge_sim: None,
            seed: mig_core::harness::DEFAULT_RANDOM_SEED,
            threads: None,
            log_level: "warn".into(),
        }
    }
}

impl RunConfig {
    /// Defaults, then `path` if given. Relative paths in the file resolve
    /// against the file's directory.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.pool,
            &mut cfg.embeddings,
            &mut cfg.label_order,
            &mut cfg.graph,
            &mut cfg.output,
            &mut cfg.report,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn alpha_or_default(&self) -> f64 {
        self.alpha.unwrap_or(DEFAULT_ALPHA)
    }

    pub fn sampler(&self, budget: usize) -> SamplerConfig {
        SamplerConfig {
            budget,
            gain_mode: self.gain_mode,
            orientation: self.orientation,
            lazy: self.lazy,
            epsilon: self.epsilon,
        }
    }

    pub fn require<'a>(field: &'a Option<PathBuf>, name: &str) -> Result<&'a Path> {
        field
            .as_deref()
            .ok_or_else(|| anyhow::Error::new(mig_core::Error::InvalidParameter(format!("--{name} is required"))))
    }
}

/// Flag values that override the resolved config when present.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// TOML file with any `RunConfig` fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "MIG_THREADS")]
    pub threads: Option<usize>,
    /// error, warn, info, debug or trace
    #[arg(long, global = true)]
    pub log_level: Option<String>,
    /// Label similarity threshold T
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Propagation strength α
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// power:<a>, exp:<a> or linear
    #[arg(long = "info-function", global = true)]
    pub info_function: Option<InfoFunction>,
    /// exact or gradient
    #[arg(long, global = true)]
    pub gain_mode: Option<GainMode>,
    /// adjoint or literal
    #[arg(long, global = true)]
    pub orientation: Option<GradientOrientation>,
    /// Score every candidate at every step
    #[arg(long, global = true)]
    pub no_lazy: bool,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(t) = self.threads {
            cfg.threads = Some(t);
        }
        if let Some(l) = &self.log_level {
            cfg.log_level = l.clone();
        }
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = Some(a);
        }
        if let Some(f) = self.info_function {
            cfg.info_function = f;
        }
        if let Some(m) = self.gain_mode {
            cfg.gain_mode = m;
        }
        if let Some(o) = self.orientation {
            cfg.orientation = o;
        }
        if self.no_lazy {
            cfg.lazy = false;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

pub fn set_path(slot: &mut Option<PathBuf>, flag: &Option<PathBuf>) {
    if let Some(p) = flag {
        *slot = Some(p.clone());
    }
}
