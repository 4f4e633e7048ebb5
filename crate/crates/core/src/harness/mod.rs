//! Oracles, baselines and synthetic pools for checking and benchmarking selection.

pub mod baselines;
pub mod compare;
pub mod oracle;
pub mod synth;

pub use baselines::{facility_location_select, quality_top_n, random_select, PointEmbeddings, DEFAULT_RANDOM_SEED};
pub use compare::{compare_methods, classify_shape, ComparisonReport, Method, Shape, Sweep};
pub use oracle::{brute_force_optimum, check_submodularity, Optimum, SubmodularityReport};
pub use synth::{generate_pool, random_instance, SmallInstance, SyntheticPool, SyntheticPoolSpec};
