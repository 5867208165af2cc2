use alloc::vec::Vec;

use super::partition::{rand_distance, Partition};
use crate::engine::affinity_batch;
use crate::error::{Error, Result};
use crate::measure::DistanceMeasure;
use crate::model::{BoundingBox, ClusterModel, Dataset};
use crate::sampler::SamplerConfig;

/// Stability of several partitions and of their consensus.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusReport {
    /// Percentage of unstable points under each base partition.
    pub base_unstable: Vec<f64>,
    pub consensus_unstable: f64,
    /// Rand distance of each base partition to the reference.
    pub base_rand: Vec<f64>,
    pub consensus_rand: f64,
}

/// Percentage of points whose affinity vector is unstable when the
/// partition's centroids are the representatives.
pub fn unstable_percentage(
    data: &Dataset,
    partition: &Partition,
    measure: &DistanceMeasure,
    config: &SamplerConfig,
    box_inflation: f64,
) -> Result<f64> {
    if partition.len() != data.len() {
        return Err(Error::LengthMismatch {
            left: data.len(),
            right: partition.len(),
        });
    }
    let compact = partition.compacted();
    let model = ClusterModel::from_labels(data, compact.labels(), Some(compact.k()))?;
    let bounds = BoundingBox::for_model(data, &model, box_inflation)?;
    let mut unstable = 0usize;
    for a in affinity_batch(data, &model, measure, &bounds, config)? {
        if !a?.stable {
            unstable += 1;
        }
    }
    Ok(100.0 * unstable as f64 / data.len() as f64)
}

/// Scores each base partition and the consensus (all with the same seed)
/// and compares each with the reference.
pub fn consensus_report(
    base: &[Partition],
    consensus: &Partition,
    reference: &Partition,
    data: &Dataset,
    measure: &DistanceMeasure,
    config: &SamplerConfig,
    box_inflation: f64,
) -> Result<ConsensusReport> {
    let mut base_unstable = Vec::with_capacity(base.len());
    let mut base_rand = Vec::with_capacity(base.len());
    for (i, p) in base.iter().enumerate() {
        base_unstable.push(
            unstable_percentage(data, p, measure, config, box_inflation).map_err(|e| e.at(i))?,
        );
        base_rand.push(rand_distance(p, reference)?);
    }
    Ok(ConsensusReport {
        base_unstable,
        consensus_unstable: unstable_percentage(data, consensus, measure, config, box_inflation)?,
        base_rand,
        consensus_rand: rand_distance(consensus, reference)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::synth::{five_cluster_centers, gaussian_blobs};

    #[test]
    fn identical_partitions_score_identically() {
        let centers = five_cluster_centers(2, 4.0).unwrap();
        let (data, truth) = gaussian_blobs(&centers, &[20; 5], 1.0, &mut rng_from_seed(6)).unwrap();
        let p = Partition::new(truth);
        let config = SamplerConfig {
            samples: 100,
            burn_in: 50,
            ..SamplerConfig::default()
        };
        let r = consensus_report(
            &[p.clone(), p.clone()],
            &p,
            &p,
            &data,
            &DistanceMeasure::SquaredEuclidean,
            &config,
            2.0,
        )
        .unwrap();
        assert_eq!(r.base_unstable[0], r.consensus_unstable);
        assert_eq!(r.base_unstable[1], r.consensus_unstable);
        assert_eq!(r.consensus_rand, 0.0);
        assert!((0.0..=100.0).contains(&r.consensus_unstable));
    }
}
