use alloc::vec::Vec;

use rand::seq::index::sample as sample_indices;
use rand::Rng;

use super::kmeans::{assign_nearest, kmeanspp_seed, lloyd};
use crate::engine::affinity_batch;
use crate::error::{Error, Result};
use crate::math::{ceil, sqrt};
use crate::measure::DistanceMeasure;
use crate::model::{BoundingBox, ClusterModel, Dataset};
use crate::sampler::SamplerConfig;

/// `(ceil(2 alpha sqrt(n)), ceil(2 (1 - alpha) sqrt(n)))`.
pub fn active_sample_sizes(n: usize, alpha: f64) -> (usize, usize) {
    let root = sqrt(n as f64);
    // Absorb rounding so that e.g. 2 * 0.8 * 100 counts as exactly 160.
    let size = |x: f64| ceil(x - 1e-9).max(0.0) as usize;
    (size(2.0 * alpha * root), size(2.0 * (1.0 - alpha) * root))
}

/// Bookkeeping of one active-clustering run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveReport {
    pub stable_pool: usize,
    pub unstable_pool: usize,
    pub requested_stable: usize,
    pub requested_unstable: usize,
    pub drawn_stable: usize,
    pub drawn_unstable: usize,
    /// Extra stable points drawn because the unstable pool ran short.
    pub stable_for_unstable: usize,
    /// Extra unstable points drawn because the stable pool ran short.
    pub unstable_for_stable: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveResult {
    /// Final centers with every point's label attached.
    pub model: ClusterModel,
    pub seeds: Vec<Vec<f64>>,
    /// Indices of the points Lloyd was run on.
    pub sample: Vec<usize>,
    pub report: ActiveReport,
}

/// Seeds `k` centers with k-means++, scores every point against them, and
/// clusters a small sample mixing stable and unstable points; every point
/// is then assigned to its nearest final center.
#[allow(clippy::too_many_arguments)]
pub fn active_cluster<R: Rng + ?Sized>(
    data: &Dataset,
    k: usize,
    alpha: f64,
    measure: &DistanceMeasure,
    config: &SamplerConfig,
    box_inflation: f64,
    max_iters: usize,
    rng: &mut R,
) -> Result<ActiveResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", "must lie in (0, 1)"));
    }
    let seeds = kmeanspp_seed(data, k, rng)?;
    let seed_model = ClusterModel::new(seeds.clone())?;
    let bounds = BoundingBox::for_model(data, &seed_model, box_inflation)?;
    let scores = affinity_batch(data, &seed_model, measure, &bounds, config)?;
    let mut stable = Vec::new();
    let mut unstable = Vec::new();
    for (i, s) in scores.into_iter().enumerate() {
        if s?.stable {
            stable.push(i);
        } else {
            unstable.push(i);
        }
    }
    let (want_stable, want_unstable) = active_sample_sizes(data.len(), alpha);
    let mut take_stable = want_stable.min(stable.len());
    let mut take_unstable = want_unstable.min(unstable.len());
    let unstable_for_stable = (want_stable - take_stable).min(unstable.len() - take_unstable);
    take_unstable += unstable_for_stable;
    let stable_for_unstable =
        (want_unstable.saturating_sub(unstable.len())).min(stable.len() - take_stable);
    take_stable += stable_for_unstable;

    let mut sample: Vec<usize> = sample_indices(rng, stable.len(), take_stable)
        .into_iter()
        .map(|i| stable[i])
        .collect();
    sample.extend(
        sample_indices(rng, unstable.len(), take_unstable)
            .into_iter()
            .map(|i| unstable[i]),
    );
    let subset = data.subset(&sample)?;
    let fit = lloyd(&subset, seeds.clone(), max_iters)?;
    let (labels, _) = assign_nearest(data, &fit.centers);
    let model = ClusterModel::new(fit.centers)?.with_labels(labels)?;
    Ok(ActiveResult {
        model,
        seeds,
        sample,
        report: ActiveReport {
            stable_pool: stable.len(),
            unstable_pool: unstable.len(),
            requested_stable: want_stable,
            requested_unstable: want_unstable,
            drawn_stable: take_stable,
            drawn_unstable: take_unstable,
            stable_for_unstable,
            unstable_for_stable,
        },
    })
}
