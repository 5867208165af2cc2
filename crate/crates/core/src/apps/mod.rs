//! Clustering workflows built on affinity scores: active sampling,
//! consensus validation and incremental updates, plus the k-means and
//! partition-comparison machinery they use.

mod active;
mod consensus;
mod incremental;
mod kmeans;
mod partition;

pub use active::{active_cluster, active_sample_sizes, ActiveReport, ActiveResult};
pub use consensus::{consensus_report, unstable_percentage, ConsensusReport};
pub use incremental::{incremental_update, BatchReport, IncrementalState, PoolEntry};
pub use kmeans::{assign_nearest, kmeans, kmeanspp_seed, lloyd, LloydResult};
pub use partition::{align_labels, majority_vote, rand_distance, Partition};
