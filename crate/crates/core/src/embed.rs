//! Maps that change where scoring happens: projection onto the affine hull
//! of the representatives, and random Fourier features for the RBF kernel.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::math::{cos, dot, sqrt};
use crate::model::{ClusterModel, Dataset};
use crate::rng::rng_from_seed;

/// Singular values below this fraction of the largest are dropped.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Orthogonal projection onto the affine hull of the representatives.
///
/// Squared Euclidean distance splits into an in-hull and an orthogonal
/// part, and the orthogonal part is shared by every site, so cells factor
/// as (cell in the hull) x (orthogonal complement) and volume ratios are
/// unchanged by projecting.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanProjection {
    mean: Vec<f64>,
    basis: Vec<Vec<f64>>,
    singular_values: Vec<f64>,
}

pub fn fit_span_projection(model: &ClusterModel) -> Result<SpanProjection> {
    let (k, d) = (model.k(), model.dim());
    if k < 2 {
        return Err(Error::invalid(
            "k",
            "span projection needs at least 2 representatives",
        ));
    }
    let mut mean = vec![0.0; d];
    for c in model.representatives() {
        for (m, v) in mean.iter_mut().zip(c) {
            *m += v / k as f64;
        }
    }
    let centered = DMatrix::from_fn(k, d, |i, j| model.representative(i)[j] - mean[j]);
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::RankZero)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let largest = svd.singular_values[order[0]];
    if !(largest > 0.0) {
        return Err(Error::RankZero);
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut singular_values = Vec::new();
    for &i in &order {
        let s = svd.singular_values[i];
        if s <= RANK_CUTOFF * largest {
            break;
        }
        basis.push(v_t.row(i).iter().cloned().collect());
        singular_values.push(s);
    }
    // Two Gram-Schmidt passes tighten orthonormality to rounding level.
    for _ in 0..2 {
        for i in 0..basis.len() {
            for j in 0..i {
                let p = dot(&basis[i], &basis[j]);
                let prev = basis[j].clone();
                for (a, b) in basis[i].iter_mut().zip(&prev) {
                    *a -= p * b;
                }
            }
            let n = sqrt(dot(&basis[i], &basis[i]));
            for a in &mut basis[i] {
                *a /= n;
            }
        }
    }
    Ok(SpanProjection {
        mean,
        basis,
        singular_values,
    })
}

impl SpanProjection {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Basis coordinates of `y - mean`.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: y.len(),
            });
        }
        let centered: Vec<f64> = y.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        Ok(self.basis.iter().map(|b| dot(b, &centered)).collect())
    }

    /// Ambient point with the given basis coordinates.
    pub fn lift(&self, coords: &[f64]) -> Vec<f64> {
        let mut y = self.mean.clone();
        for (c, b) in coords.iter().zip(&self.basis) {
            for (v, e) in y.iter_mut().zip(b) {
                *v += c * e;
            }
        }
        y
    }

    /// Component of `y - mean` orthogonal to the hull.
    pub fn residual(&self, y: &[f64]) -> Result<Vec<f64>> {
        let lifted = self.lift(&self.project(y)?);
        Ok(y.iter().zip(&lifted).map(|(a, b)| a - b).collect())
    }

    pub fn project_dataset(&self, data: &Dataset) -> Result<Dataset> {
        let mut flat = Vec::with_capacity(data.len() * self.rank());
        for p in data.points() {
            flat.extend(self.project(p)?);
        }
        Dataset::from_flat(flat, self.rank())
    }

    /// Projected representatives with the original weights and labels.
    pub fn project_model(&self, model: &ClusterModel) -> Result<ClusterModel> {
        let mut flat = Vec::with_capacity(model.k() * self.rank());
        for c in model.representatives() {
            flat.extend(self.project(c)?);
        }
        model.with_representatives(flat, self.rank())
    }
}

/// Random Fourier features `z(y) = sqrt(2/D) cos(W y + b)` whose inner
/// products approximate `exp(-|y - y'|^2 / (2 sigma^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierEmbedding {
    frequencies: Vec<f64>,
    phases: Vec<f64>,
    dim: usize,
    sigma: f64,
    seed: u64,
}

/// Basis coordinates of `y - mean`; same as [`SpanProjection::project`].
pub fn apply_projection(proj: &SpanProjection, y: &[f64]) -> Result<Vec<f64>> {
    proj.project(y)
}

pub fn fit_fourier_embedding(
    dim: usize,
    features: usize,
    sigma: f64,
    seed: u64,
) -> Result<FourierEmbedding> {
    if dim == 0 {
        return Err(Error::invalid("dimension", "must be at least 1"));
    }
    if features == 0 {
        return Err(Error::invalid("features", "must be at least 1"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    let mut rng = rng_from_seed(seed);
    let frequencies = (0..features * dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal) / sigma)
        .collect();
    let phases = (0..features)
        .map(|_| rng.gen::<f64>() * core::f64::consts::TAU)
        .collect();
    Ok(FourierEmbedding {
        frequencies,
        phases,
        dim,
        sigma,
        seed,
    })
}

impl FourierEmbedding {
    pub fn features(&self) -> usize {
        self.phases.len()
    }

    pub fn input_dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn embed(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: y.len(),
            });
        }
        let scale = sqrt(2.0 / self.features() as f64);
        Ok(self
            .frequencies
            .chunks_exact(self.dim)
            .zip(&self.phases)
            .map(|(w, b)| scale * cos(dot(w, y) + b))
            .collect())
    }

    pub fn embed_dataset(&self, data: &Dataset) -> Result<Dataset> {
        let mut flat = Vec::with_capacity(data.len() * self.features());
        for p in data.points() {
            flat.extend(self.embed(p)?);
        }
        Dataset::from_flat(flat, self.features())
    }
}
