//! Datasets, cluster models and axis-aligned bounds.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{all_finite, dist};

/// Representatives closer than this are treated as the same site.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-12;

/// `n` points of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    coords: Vec<f64>,
    dim: usize,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().ok_or(Error::Empty("dataset"))?.len();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                }
                .at(i));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(coords, dim)
    }

    pub fn from_flat(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension", "must be at least 1"));
        }
        if coords.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if !all_finite(&coords) {
            return Err(Error::NonFinite("dataset"));
        }
        Ok(Self { coords, dim })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> core::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Self::from_flat(coords, self.dim)
    }

    /// Appends the rows of `other`.
    pub fn concat(&self, other: &Dataset) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Self::from_flat(coords, self.dim)
    }
}

/// Closed axis-aligned box `lower <= y <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::Empty("bounding box"));
        }
        if !all_finite(&lower) || !all_finite(&upper) {
            return Err(Error::NonFinite("bounding box"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l >= u) {
            return Err(Error::invalid("bounding box", "lower must be below upper"));
        }
        Ok(Self { lower, upper })
    }

    /// Tight box around `points`, scaled by `factor` about its center.
    ///
    /// Axes along which all points agree get the largest half-width seen on
    /// any other axis (or 1 when every axis is flat) before scaling.
    pub fn covering<'a, I>(points: I, factor: f64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        if !(factor.is_finite() && factor >= 1.0) {
            return Err(Error::invalid(
                "box inflation",
                "must be a finite value >= 1",
            ));
        }
        let mut iter = points.into_iter();
        let first = iter.next().ok_or(Error::Empty("point set"))?;
        let mut lower = first.to_vec();
        let mut upper = first.to_vec();
        for p in iter {
            if p.len() != lower.len() {
                return Err(Error::DimensionMismatch {
                    expected: lower.len(),
                    found: p.len(),
                });
            }
            for (j, &v) in p.iter().enumerate() {
                lower[j] = lower[j].min(v);
                upper[j] = upper[j].max(v);
            }
        }
        let half: Vec<f64> = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| (u - l) / 2.0)
            .collect();
        let widest = half.iter().cloned().fold(0.0, f64::max);
        let fallback = if widest > 0.0 { widest } else { 1.0 };
        let flat = 1e-12 * fallback;
        let mut out_lower = Vec::with_capacity(half.len());
        let mut out_upper = Vec::with_capacity(half.len());
        for j in 0..half.len() {
            let center = (lower[j] + upper[j]) / 2.0;
            let h = if half[j] > flat { half[j] } else { fallback } * factor;
            out_lower.push(center - h);
            out_upper.push(center + h);
        }
        Self::new(out_lower, out_upper)
    }

    /// Box around the data and the representatives together.
    pub fn for_model(data: &Dataset, model: &ClusterModel, factor: f64) -> Result<Self> {
        Self::covering(data.points().chain(model.representatives()), factor)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (l + u) / 2.0)
            .collect()
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .product()
    }
}

/// How cluster weights were assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// All weights zero.
    Unweighted,
    /// Caller-supplied weights.
    Explicit,
    /// `w(C_i) = |C_i| / n` and `w(x) = 1 / n` for the query.
    ClusterSize { counts: Vec<usize>, total: usize },
}

/// Cluster representatives (the sites of the influence diagram) with
/// optional weights and point labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    reps: Vec<f64>,
    dim: usize,
    weights: Vec<f64>,
    query_weight: f64,
    labels: Option<Vec<usize>>,
    weighting: Weighting,
}

impl ClusterModel {
    pub fn new(representatives: Vec<Vec<f64>>) -> Result<Self> {
        let dim = representatives
            .first()
            .ok_or(Error::Empty("representatives"))?
            .len();
        let mut flat = Vec::with_capacity(representatives.len() * dim);
        for r in &representatives {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::from_flat(flat, dim)
    }

    pub fn from_flat(reps: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension", "must be at least 1"));
        }
        if reps.is_empty() {
            return Err(Error::Empty("representatives"));
        }
        if reps.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: reps.len() % dim,
            });
        }
        if !all_finite(&reps) {
            return Err(Error::NonFinite("representatives"));
        }
        let k = reps.len() / dim;
        for i in 0..k {
            for j in i + 1..k {
                let a = &reps[i * dim..(i + 1) * dim];
                let b = &reps[j * dim..(j + 1) * dim];
                if dist(a, b) < COINCIDENCE_TOLERANCE {
                    return Err(Error::DuplicateRepresentatives {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(Self {
            reps,
            dim,
            weights: vec![0.0; k],
            query_weight: 0.0,
            labels: None,
            weighting: Weighting::Unweighted,
        })
    }

    /// Centroids of each label group. `k` defaults to `max(label) + 1`;
    /// every cluster must have at least one member.
    pub fn from_labels(data: &Dataset, labels: &[usize], k: Option<usize>) -> Result<Self> {
        if labels.len() != data.len() {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: labels.len(),
            });
        }
        let k = match k {
            Some(k) => k,
            None => labels.iter().max().map_or(0, |m| m + 1),
        };
        if k == 0 {
            return Err(Error::Empty("labels"));
        }
        let dim = data.dim();
        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for (p, &l) in data.points().zip(labels) {
            if l >= k {
                return Err(Error::LabelOutOfRange { label: l, k });
            }
            counts[l] += 1;
            for (s, v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(p) {
                *s += v;
            }
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyCluster(empty));
        }
        for (c, chunk) in counts.iter().zip(sums.chunks_exact_mut(dim)) {
            for s in chunk {
                *s /= *c as f64;
            }
        }
        Self::from_flat(sums, dim)?.with_labels(labels.to_vec())
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        let k = self.k();
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::LabelOutOfRange { label: bad, k });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Explicit site weights plus the weight given to a query point.
    pub fn with_weights(mut self, weights: Vec<f64>, query_weight: f64) -> Result<Self> {
        if weights.len() != self.k() {
            return Err(Error::LengthMismatch {
                left: self.k(),
                right: weights.len(),
            });
        }
        if !all_finite(&weights) || !query_weight.is_finite() {
            return Err(Error::NonFinite("weights"));
        }
        self.weights = weights;
        self.query_weight = query_weight;
        self.weighting = Weighting::Explicit;
        Ok(self)
    }

    /// `w(C_i) = |C_i| / n`, `w(x) = 1 / n`. Requires labels.
    pub fn with_cluster_size_weights(mut self) -> Result<Self> {
        let labels = self.labels.as_ref().ok_or(Error::invalid(
            "weighting",
            "cluster-size weights need labels",
        ))?;
        let mut counts = vec![0usize; self.k()];
        for &l in labels {
            counts[l] += 1;
        }
        let total = labels.len();
        if total == 0 {
            return Err(Error::Empty("labels"));
        }
        self.weights = counts.iter().map(|&c| c as f64 / total as f64).collect();
        self.query_weight = 1.0 / total as f64;
        self.weighting = Weighting::ClusterSize { counts, total };
        Ok(self)
    }

    /// The model as seen by a query that is itself a member of `label`:
    /// under cluster-size weighting the member is removed from its own
    /// cluster's count. Other weightings are returned unchanged.
    pub fn excluding_member(&self, label: usize) -> Self {
        let mut out = self.clone();
        if let Weighting::ClusterSize { counts, total } = &self.weighting {
            if label < counts.len() && counts[label] > 0 {
                out.weights[label] = (counts[label] - 1) as f64 / *total as f64;
            }
        }
        out
    }

    /// Adds `delta` to every site weight and to the query weight.
    pub fn shift_weights(&self, delta: f64) -> Self {
        let mut out = self.clone();
        for w in &mut out.weights {
            *w += delta;
        }
        out.query_weight += delta;
        out.weighting = Weighting::Explicit;
        out
    }

    /// Same weights and labels over new representative coordinates.
    pub fn with_representatives(&self, reps: Vec<f64>, dim: usize) -> Result<Self> {
        let fresh = Self::from_flat(reps, dim)?;
        if fresh.k() != self.k() {
            return Err(Error::LengthMismatch {
                left: self.k(),
                right: fresh.k(),
            });
        }
        Ok(Self {
            reps: fresh.reps,
            dim,
            ..self.clone()
        })
    }

    pub fn k(&self) -> usize {
        self.reps.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn representative(&self, i: usize) -> &[f64] {
        &self.reps[i * self.dim..(i + 1) * self.dim]
    }

    pub fn representatives(&self) -> core::slice::ChunksExact<'_, f64> {
        self.reps.chunks_exact(self.dim)
    }

    pub fn representatives_flat(&self) -> &[f64] {
        &self.reps
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn query_weight(&self) -> f64 {
        self.query_weight
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn weighting(&self) -> &Weighting {
        &self.weighting
    }

    /// First representative within [`COINCIDENCE_TOLERANCE`] of `x`.
    pub fn coincident_representative(&self, x: &[f64]) -> Option<usize> {
        self.representatives()
            .position(|c| dist(c, x) < COINCIDENCE_TOLERANCE)
    }
}
