//! Per-point affinity scores for a clustering.
//!
//! A query point is inserted as a new site into the (power or Bregman)
//! Voronoi diagram of the cluster representatives. The fraction of the
//! query's new cell that used to belong to each cluster is that cluster's
//! affinity. Cells are convex, so the fractions are estimated by
//! hit-and-run sampling; exact 2D polygon clipping and a grid oracle are
//! provided to check the estimates.
//!
//! The crate is `no_std` (with `alloc`). Enable `std` for std-backed
//! randomness and `parallel` for rayon-backed batch scoring.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod apps;
pub mod cell;
pub mod embed;
pub mod engine;
mod error;
pub mod field;
mod lp;
pub(crate) mod math;
pub mod measure;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod synth;

pub use cell::{
    bisector_halfspace, build_influence_cell, cell_contains, chord_intersect, steal_owner,
    FaceKind, HalfSpace, InfluenceCell, CONTAINMENT_TOLERANCE,
};
pub use engine::{
    affinity_batch, affinity_point, classify_stability, required_samples, AffinityVector, Stability,
};
pub use error::{Error, Result};
pub use measure::{DistanceMeasure, Generator};
pub use model::{BoundingBox, ClusterModel, Dataset, Weighting};
pub use sampler::{
    estimate_whitening, hit_and_run_step, sample_polytope, SamplerConfig, WhiteningTransform,
};
