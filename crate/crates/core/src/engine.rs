//! Affinity vectors: how much of a query's influence cell each cluster
//! would lose to it.

use alloc::vec;
use alloc::vec::Vec;

use crate::cell::{build_influence_cell, owner_unchecked, steal_owner};
use crate::error::{Error, Result};
use crate::math::{ceil, log};
use crate::measure::DistanceMeasure;
use crate::model::{BoundingBox, ClusterModel, Dataset, Weighting};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sampler::{walk, SamplerConfig};

/// Per-cluster stolen-volume fractions plus the stability verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityVector {
    pub alphas: Vec<f64>,
    pub stable: bool,
    /// 1 for stable points, otherwise the largest alpha.
    pub score: f64,
    pub stable_index: Option<usize>,
    /// Whether the bounding box cut the query's cell.
    pub clipped: bool,
}

impl AffinityVector {
    pub fn from_alphas(alphas: Vec<f64>, clipped: bool) -> Result<Self> {
        let s = classify_stability(&alphas)?;
        Ok(Self {
            alphas,
            stable: s.stable,
            score: s.score,
            stable_index: s.stable_index,
            clipped,
        })
    }

    /// All mass on cluster `i`.
    pub fn indicator(k: usize, i: usize) -> Self {
        let mut alphas = vec![0.0; k];
        alphas[i] = 1.0;
        Self {
            alphas,
            stable: true,
            score: 1.0,
            stable_index: Some(i),
            clipped: false,
        }
    }

    pub fn k(&self) -> usize {
        self.alphas.len()
    }

    pub fn max_alpha(&self) -> f64 {
        self.alphas.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub stable: bool,
    pub score: f64,
    pub stable_index: Option<usize>,
}

/// Samples needed so every alpha is within `epsilon` with probability at
/// least `1 - delta`: Hoeffding per cluster plus a union bound over `k`,
/// `ceil(ln(2k / delta) / (2 epsilon^2))`.
pub fn required_samples(epsilon: f64, delta: f64, k: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon", "must lie in (0, 1)"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", "must lie in (0, 1)"));
    }
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    Ok(ceil(log(2.0 * k as f64 / delta) / (2.0 * epsilon * epsilon)) as usize)
}

/// Stable iff the largest alpha strictly exceeds 1/2 (at most one can).
pub fn classify_stability(alphas: &[f64]) -> Result<Stability> {
    if alphas.is_empty() || alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::MalformedAffinity);
    }
    let total: f64 = alphas.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::MalformedAffinity);
    }
    let (best, &max) =
        alphas.iter().enumerate().fold(
            (0, &alphas[0]),
            |acc, (i, a)| if *a > *acc.1 { (i, a) } else { acc },
        );
    Ok(if max > 0.5 {
        Stability {
            stable: true,
            score: 1.0,
            stable_index: Some(best),
        }
    } else {
        Stability {
            stable: false,
            score: max,
            stable_index: None,
        }
    })
}

/// Estimates the affinity vector of `x` from `config.samples` hit-and-run
/// samples of its influence cell.
///
/// A query on top of a representative gets that cluster's indicator. A
/// query whose weighted cell is empty (every point prefers some heavier
/// site) steals nothing and gets the indicator of its own owner.
pub fn affinity_point(
    x: &[f64],
    model: &ClusterModel,
    measure: &DistanceMeasure,
    bounds: &BoundingBox,
    config: &SamplerConfig,
) -> Result<AffinityVector> {
    config.validate()?;
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: x.len(),
        });
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("query"));
    }
    measure.check_domain(x)?;
    if let Some(i) = model.coincident_representative(x) {
        return Ok(AffinityVector::indicator(model.k(), i));
    }
    let cell = match build_influence_cell(x, model, measure, bounds) {
        Ok(cell) => cell,
        Err(Error::EmptyCell) => {
            return Ok(AffinityVector::indicator(
                model.k(),
                steal_owner(x, model, measure)?,
            ))
        }
        Err(e) => return Err(e),
    };
    let mut counts = vec![0usize; model.k()];
    let mut rng = rng_from_seed(config.seed);
    walk(&cell, cell.interior_point(), config, &mut rng, |z| {
        counts[owner_unchecked(z, model, measure)] += 1;
    })?;
    let m = config.samples as f64;
    AffinityVector::from_alphas(
        counts.iter().map(|&c| c as f64 / m).collect(),
        cell.clipped(),
    )
}

/// Model seen by data point `i`: under cluster-size weighting with labels
/// the point leaves its own cluster's count.
fn model_for_member<'a>(model: &'a ClusterModel, i: usize) -> alloc::borrow::Cow<'a, ClusterModel> {
    match (model.weighting(), model.labels()) {
        (Weighting::ClusterSize { .. }, Some(labels)) => {
            alloc::borrow::Cow::Owned(model.excluding_member(labels[i]))
        }
        _ => alloc::borrow::Cow::Borrowed(model),
    }
}

/// Scores every point of `data`. Point `i` uses seed
/// `derive_seed(config.seed, i)`, so the result does not depend on the
/// order (or parallelism) of evaluation. Failures are reported per index.
pub fn affinity_batch(
    data: &Dataset,
    model: &ClusterModel,
    measure: &DistanceMeasure,
    bounds: &BoundingBox,
    config: &SamplerConfig,
) -> Result<Vec<Result<AffinityVector>>> {
    if data.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: data.dim(),
        });
    }
    if let (Weighting::ClusterSize { .. }, Some(labels)) = (model.weighting(), model.labels()) {
        if labels.len() != data.len() {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: labels.len(),
            });
        }
    }
    config.validate()?;
    let score = |i: usize| {
        let local = model_for_member(model, i);
        let cfg = config.with_seed(derive_seed(config.seed, i as u64));
        affinity_point(data.point(i), &local, measure, bounds, &cfg).map_err(|e| e.at(i))
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok((0..data.len()).into_par_iter().map(score).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok((0..data.len()).map(score).collect())
    }
}
