//! Label-graph information measurement and greedy information-gain subset
//! selection for annotated instruction pools.
//!
//! The pipeline: [`ingestion`] parses a pool and its label embeddings,
//! [`label_graph`] thresholds label similarities into a graph and derives the
//! propagation matrix, [`measure`] scores datasets over that graph, and
//! [`sampler`] greedily selects a fixed-size subset. [`harness`] holds the
//! brute-force oracles, baselines and synthetic pools used to check it all.

pub mod artifact;
pub mod error;
pub mod harness;
pub mod ingestion;
pub mod label_graph;
pub mod measure;
pub mod sampler;
pub mod sparse;

pub use error::{Error, ErrorKind, Result};
pub use ingestion::{DataPoint, LabelEmbeddings, LabelId, LabelVocabulary, Pool, PoolFormat};
pub use label_graph::{LabelGraph, Propagation};
pub use measure::{InfoFunction, InfoScore, InfoVector};
pub use sampler::{GainMode, GradientOrientation, SamplerConfig, Selection, SelectionReport};
