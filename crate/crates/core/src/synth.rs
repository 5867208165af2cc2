//! Synthetic Gaussian cluster data used by tests, benchmarks and demos.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Isotropic Gaussian blobs: `counts[i]` points around `centers[i]`.
/// Returns the points (grouped by blob) and their blob labels.
pub fn gaussian_blobs<R: Rng + ?Sized>(
    centers: &[Vec<f64>],
    counts: &[usize],
    sigma: f64,
    rng: &mut R,
) -> Result<(Dataset, Vec<usize>)> {
    if centers.len() != counts.len() {
        return Err(Error::LengthMismatch {
            left: centers.len(),
            right: counts.len(),
        });
    }
    let dim = centers.first().ok_or(Error::Empty("centers"))?.len();
    let mut flat = Vec::new();
    let mut labels = Vec::new();
    for (label, (c, &n)) in centers.iter().zip(counts).enumerate() {
        if c.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.len(),
            });
        }
        for _ in 0..n {
            for &m in c {
                flat.push(m + sigma * rng.sample::<f64, _>(StandardNormal));
            }
            labels.push(label);
        }
    }
    Ok((Dataset::from_flat(flat, dim)?, labels))
}

/// Five well-separated centers: four around the origin plus the origin.
/// In 2D the four sit on the corners of a square of side `2 * spacing`;
/// in 3D on alternate corners of a cube (a regular tetrahedron).
pub fn five_cluster_centers(dim: usize, spacing: f64) -> Result<Vec<Vec<f64>>> {
    let s = spacing;
    match dim {
        2 => Ok(vec![
            vec![-s, -s],
            vec![s, -s],
            vec![-s, s],
            vec![s, s],
            vec![0.0, 0.0],
        ]),
        3 => Ok(vec![
            vec![s, s, s],
            vec![s, -s, -s],
            vec![-s, s, -s],
            vec![-s, -s, s],
            vec![0.0, 0.0, 0.0],
        ]),
        _ => Err(Error::invalid(
            "dimension",
            "five-cluster layout exists in 2D and 3D",
        )),
    }
}
