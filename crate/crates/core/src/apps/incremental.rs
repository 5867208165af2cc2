use alloc::vec::Vec;

use rand::Rng;

use super::kmeans::kmeans;
use crate::engine::{affinity_batch, AffinityVector};
use crate::error::{Error, Result};
use crate::measure::DistanceMeasure;
use crate::model::{BoundingBox, ClusterModel, Dataset};
use crate::rng::derive_seed;
use crate::sampler::SamplerConfig;

/// A point held back because it was unstable when last scored.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub point: Vec<f64>,
    pub affinity: AffinityVector,
}

/// What happened to one batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchReport {
    pub batch: usize,
    /// Batch points plus pooled points scored in the first pass.
    pub candidates: usize,
    pub stable_first_pass: usize,
    /// Previously unstable points that became stable after the center update.
    pub stable_second_pass: usize,
    pub pool_size: usize,
}

/// Streaming clustering state: centers, the number of points folded into
/// each, and the pool of points that are still unstable.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementalState {
    centers: Vec<Vec<f64>>,
    counts: Vec<usize>,
    pool: Vec<PoolEntry>,
    batches: usize,
    seen: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    reports: Vec<BatchReport>,
}

impl IncrementalState {
    /// Clusters the first batch with k-means, then scores it against the
    /// resulting centers: stable points count toward their owner, unstable
    /// ones start the pool. This is reported as batch 0.
    #[allow(clippy::too_many_arguments)]
    pub fn initialize<R: Rng + ?Sized>(
        first: &Dataset,
        k: usize,
        max_iters: usize,
        measure: &DistanceMeasure,
        config: &SamplerConfig,
        box_inflation: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let fit = kmeans(first, k, max_iters, rng)?;
        let (lower, upper) = extent(first);
        let mut state = Self {
            centers: fit.centers,
            counts: alloc::vec![0usize; k],
            pool: Vec::new(),
            batches: 0,
            seen: first.len(),
            lower,
            upper,
            reports: Vec::new(),
        };
        let points: Vec<Vec<f64>> = first.points().map(<[f64]>::to_vec).collect();
        let scores = score(&state, &points, measure, config, box_inflation, 0)?;
        let mut stable = 0;
        for (p, a) in points.into_iter().zip(scores) {
            match a.stable_index {
                Some(owner) => {
                    state.counts[owner] += 1;
                    stable += 1;
                }
                None => state.pool.push(PoolEntry {
                    point: p,
                    affinity: a,
                }),
            }
        }
        state.reports.push(BatchReport {
            batch: 0,
            candidates: first.len(),
            stable_first_pass: stable,
            stable_second_pass: 0,
            pool_size: state.pool.len(),
        });
        state.batches = 1;
        Ok(state)
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn folded(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn pool(&self) -> &[PoolEntry] {
        &self.pool
    }

    /// Batches consumed, including the first.
    pub fn batches(&self) -> usize {
        self.batches
    }

    pub fn seen(&self) -> usize {
        self.seen
    }

    pub fn reports(&self) -> &[BatchReport] {
        &self.reports
    }

    pub fn model(&self) -> Result<ClusterModel> {
        ClusterModel::new(self.centers.clone())
    }

    fn bounds(&self, factor: f64) -> Result<BoundingBox> {
        let corners = [self.lower.as_slice(), self.upper.as_slice()];
        BoundingBox::covering(
            corners
                .into_iter()
                .chain(self.centers.iter().map(Vec::as_slice)),
            factor,
        )
    }

    fn fold(&mut self, owner: usize, p: &[f64]) {
        self.counts[owner] += 1;
        let n = self.counts[owner] as f64;
        for (c, &v) in self.centers[owner].iter_mut().zip(p) {
            *c += (v - *c) / n;
        }
    }
}

fn extent(data: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let mut lower = data.point(0).to_vec();
    let mut upper = lower.clone();
    for p in data.points() {
        for (j, &v) in p.iter().enumerate() {
            lower[j] = lower[j].min(v);
            upper[j] = upper[j].max(v);
        }
    }
    (lower, upper)
}

/// Scores `points` against the current centers. Pass `pass` of batch `b`
/// uses seed `derive_seed(seed, 2b + pass)`.
fn score(
    state: &IncrementalState,
    points: &[Vec<f64>],
    measure: &DistanceMeasure,
    config: &SamplerConfig,
    box_inflation: f64,
    pass: u64,
) -> Result<Vec<AffinityVector>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let data = Dataset::new(points.to_vec())?;
    let model = state.model()?;
    let bounds = state.bounds(box_inflation)?;
    let cfg = config.with_seed(derive_seed(config.seed, 2 * state.batches as u64 + pass));
    affinity_batch(&data, &model, measure, &bounds, &cfg)?
        .into_iter()
        .collect()
}

/// Consumes one batch: scores it together with the pool, folds the stable
/// points into their centers by running means, then re-scores the still
/// unstable points once against the moved centers.
pub fn incremental_update(
    mut state: IncrementalState,
    batch: &Dataset,
    measure: &DistanceMeasure,
    config: &SamplerConfig,
    box_inflation: f64,
) -> Result<IncrementalState> {
    let dim = state.centers[0].len();
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    if batch.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: batch.dim(),
        });
    }
    for p in batch.points() {
        for (j, &v) in p.iter().enumerate() {
            state.lower[j] = state.lower[j].min(v);
            state.upper[j] = state.upper[j].max(v);
        }
    }
    let mut candidates: Vec<Vec<f64>> = core::mem::take(&mut state.pool)
        .into_iter()
        .map(|e| e.point)
        .collect();
    candidates.extend(batch.points().map(<[f64]>::to_vec));
    let total = candidates.len();

    let first = score(&state, &candidates, measure, config, box_inflation, 0)?;
    let mut unstable = Vec::new();
    let mut stable_first = 0;
    for (p, a) in candidates.into_iter().zip(first) {
        match a.stable_index {
            Some(owner) => {
                state.fold(owner, &p);
                stable_first += 1;
            }
            None => unstable.push(p),
        }
    }

    let second = score(&state, &unstable, measure, config, box_inflation, 1)?;
    let mut stable_second = 0;
    for (p, a) in unstable.into_iter().zip(second) {
        match a.stable_index {
            Some(owner) => {
                state.fold(owner, &p);
                stable_second += 1;
            }
            None => state.pool.push(PoolEntry {
                point: p,
                affinity: a,
            }),
        }
    }

    state.seen += batch.len();
    state.reports.push(BatchReport {
        batch: state.batches,
        candidates: total,
        stable_first_pass: stable_first,
        stable_second_pass: stable_second,
        pool_size: state.pool.len(),
    });
    state.batches += 1;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::kmeans::lloyd;
    use crate::math::dist;
    use crate::rng::rng_from_seed;
    use crate::synth::{five_cluster_centers, gaussian_blobs};

    const EUCLID: DistanceMeasure = DistanceMeasure::SquaredEuclidean;

    fn quick() -> SamplerConfig {
        SamplerConfig {
            samples: 200,
            burn_in: 100,
            ..SamplerConfig::default()
        }
    }

    fn stream(seed: u64, batches: usize, per: usize) -> Vec<Dataset> {
        let centers = five_cluster_centers(2, 10.0).unwrap();
        let mut rng = rng_from_seed(seed);
        (0..batches)
            .map(|_| {
                gaussian_blobs(&centers, &[per; 5], 1.0, &mut rng)
                    .unwrap()
                    .0
            })
            .collect()
    }

    #[test]
    fn mass_is_conserved() {
        let batches = stream(1, 3, 20);
        let mut state = IncrementalState::initialize(
            &batches[0],
            5,
            50,
            &EUCLID,
            &quick(),
            2.0,
            &mut rng_from_seed(2),
        )
        .unwrap();
        assert_eq!(state.folded() + state.pool().len(), state.seen());
        for b in &batches[1..] {
            state = incremental_update(state, b, &EUCLID, &quick(), 2.0).unwrap();
            assert_eq!(state.folded() + state.pool().len(), state.seen());
            let r = state.reports().last().unwrap();
            assert_eq!(r.pool_size, state.pool().len());
            assert_eq!(
                r.stable_first_pass + r.stable_second_pass + r.pool_size,
                r.candidates
            );
        }
        assert!(state.pool().iter().all(|e| !e.affinity.stable));
    }

    #[test]
    fn coincident_batch_changes_nothing_but_counts() {
        let batches = stream(3, 1, 20);
        let mut state = IncrementalState::initialize(
            &batches[0],
            5,
            50,
            &EUCLID,
            &quick(),
            2.0,
            &mut rng_from_seed(4),
        )
        .unwrap();
        // An empty pool keeps the check independent of re-scoring noise.
        state.pool.clear();
        state.seen = state.folded();
        let before = state.clone();
        let batch = Dataset::new(state.centers().to_vec()).unwrap();
        let after = incremental_update(state, &batch, &EUCLID, &quick(), 2.0).unwrap();
        assert_eq!(after.centers(), before.centers());
        assert_eq!(after.pool(), before.pool());
        assert!(after
            .counts()
            .iter()
            .zip(before.counts())
            .all(|(a, b)| *a == b + 1));
    }

    #[test]
    fn stream_tracks_full_lloyd() {
        let batches = stream(5, 5, 40);
        let mut state = IncrementalState::initialize(
            &batches[0],
            5,
            100,
            &EUCLID,
            &quick(),
            2.0,
            &mut rng_from_seed(6),
        )
        .unwrap();
        let mut all = batches[0].clone();
        for b in &batches[1..] {
            state = incremental_update(state, b, &EUCLID, &quick(), 2.0).unwrap();
            all = all.concat(b).unwrap();
        }
        assert_eq!(state.reports().len(), 5);
        let full = lloyd(&all, state.centers().to_vec(), 100).unwrap();
        for (c, f) in state.centers().iter().zip(&full.centers) {
            assert!(dist(c, f) < 0.5, "{c:?} vs {f:?}");
        }
    }
}
