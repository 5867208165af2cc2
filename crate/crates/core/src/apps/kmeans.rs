use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::sq_dist;
use crate::model::{ClusterModel, Dataset};

/// k-means++ seeding: the first center uniformly, each next one with
/// probability proportional to its squared distance to the nearest chosen
/// center. Points already chosen have zero weight, so seeds are distinct
/// whenever the data has at least `k` distinct points.
pub fn kmeanspp_seed<R: Rng + ?Sized>(
    data: &Dataset,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let n = data.len();
    if k == 0 || k > n {
        return Err(Error::invalid("k", "must lie in [1, n]"));
    }
    let mut centers = vec![data.point(rng.gen_range(0..n)).to_vec()];
    let mut nearest: Vec<f64> = data.points().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w > 0.0 {
                    acc += w;
                    chosen = Some(i);
                    if acc > target {
                        break;
                    }
                }
            }
            chosen.unwrap_or(0)
        } else {
            rng.gen_range(0..n)
        };
        let c = data.point(pick).to_vec();
        for (d, p) in nearest.iter_mut().zip(data.points()) {
            *d = d.min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    Ok(centers)
}

/// Nearest-center labels (lowest index on ties) and the total squared
/// distance.
pub fn assign_nearest(data: &Dataset, centers: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut cost = 0.0;
    let labels = data
        .points()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (j, c) in centers.iter().enumerate() {
                let d = sq_dist(p, c);
                if d < best.1 {
                    best = (j, d);
                }
            }
            cost += best.1;
            best.0
        })
        .collect();
    (labels, cost)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydResult {
    pub centers: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    /// Cost of each assignment step; non-increasing.
    pub costs: Vec<f64>,
    pub converged: bool,
}

impl LloydResult {
    pub fn cost(&self) -> f64 {
        self.costs.last().copied().unwrap_or(0.0)
    }

    /// Centers as representatives, labels attached.
    pub fn model(&self) -> Result<ClusterModel> {
        ClusterModel::new(self.centers.clone())?.with_labels(self.labels.clone())
    }
}

/// Lloyd iterations from `centers` until the assignment stops changing or
/// `max_iters` assignment steps have run. A cluster left empty takes over
/// the point farthest from its current center.
pub fn lloyd(data: &Dataset, centers: Vec<Vec<f64>>, max_iters: usize) -> Result<LloydResult> {
    let k = centers.len();
    if k == 0 || k > data.len() {
        return Err(Error::invalid("k", "must lie in [1, n]"));
    }
    if let Some(c) = centers.iter().find(|c| c.len() != data.dim()) {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: c.len(),
        });
    }
    let dim = data.dim();
    let mut centers = centers;
    let mut costs = Vec::new();
    let mut previous: Option<Vec<usize>> = None;
    let mut converged = false;
    for _ in 0..max_iters.max(1) {
        let (mut labels, mut cost) = assign_nearest(data, &centers);
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        for empty in 0..k {
            if sizes[empty] > 0 {
                continue;
            }
            let far = (0..data.len())
                .filter(|&i| sizes[labels[i]] > 1)
                .max_by(|&a, &b| {
                    let da = sq_dist(data.point(a), &centers[labels[a]]);
                    let db = sq_dist(data.point(b), &centers[labels[b]]);
                    da.total_cmp(&db).then(b.cmp(&a))
                })
                .ok_or(Error::EmptyCluster(empty))?;
            cost -= sq_dist(data.point(far), &centers[labels[far]]);
            sizes[labels[far]] -= 1;
            sizes[empty] = 1;
            labels[far] = empty;
            centers[empty] = data.point(far).to_vec();
        }
        costs.push(cost.max(0.0));
        if previous.as_ref() == Some(&labels) {
            converged = true;
            previous = Some(labels);
            break;
        }
        let mut sums = vec![0.0; k * dim];
        for (p, &l) in data.points().zip(&labels) {
            for (s, v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(p) {
                *s += v;
            }
        }
        for (j, c) in centers.iter_mut().enumerate() {
            for (d, v) in c.iter_mut().enumerate() {
                *v = sums[j * dim + d] / sizes[j] as f64;
            }
        }
        previous = Some(labels);
    }
    let labels = previous.unwrap_or_default();
    Ok(LloydResult {
        centers,
        labels,
        costs,
        converged,
    })
}

/// k-means++ seeding followed by Lloyd.
pub fn kmeans<R: Rng + ?Sized>(
    data: &Dataset,
    k: usize,
    max_iters: usize,
    rng: &mut R,
) -> Result<LloydResult> {
    let seeds = kmeanspp_seed(data, k, rng)?;
    lloyd(data, seeds, max_iters)
}
