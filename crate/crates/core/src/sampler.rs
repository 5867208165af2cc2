//! Approximately uniform samples from a convex cell by hit-and-run.
//!
//! A short pilot walk estimates the cell's covariance; its inverse square
//! root rounds the cell so directions drawn uniformly in the rounded frame
//! cross it efficiently. The walk itself stays in the original frame: a
//! direction `u` in the rounded frame maps back to `A^{-1} u`, and a uniform
//! point on the mapped chord is the image of a uniform point on the rounded
//! chord.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cell::{chord_intersect, InfluenceCell, CONTAINMENT_TOLERANCE};
use crate::error::{Error, Result};
use crate::math::{norm, sqrt};

/// Covariance condition number beyond which rounding is skipped.
pub const MAX_CONDITION: f64 = 1e12;

/// Parameters of one sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Number of emitted samples `m`.
    pub samples: usize,
    /// Steps discarded before the first emitted sample.
    pub burn_in: usize,
    /// Pilot walk length; `None` means `max(200, 10 * dim)`.
    pub pilot_steps: Option<usize>,
    pub seed: u64,
    /// Target additive error on each affinity entry.
    pub epsilon: f64,
    /// Failure probability for the `epsilon` guarantee.
    pub delta: f64,
    /// Round the cell with a pilot-estimated affine map before walking.
    pub whiten: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            burn_in: 1000,
            pilot_steps: None,
            seed: 0,
            epsilon: 0.04,
            delta: 0.05,
            whiten: true,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("samples", "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid("epsilon", "must lie in (0, 1)"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta", "must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn pilot_steps_for(&self, dim: usize) -> usize {
        self.pilot_steps.unwrap_or_else(|| (10 * dim).max(200))
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Affine map `T(y) = A (y - mu)` with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningTransform {
    shift: Vec<f64>,
    forward: Vec<f64>,
    inverse: Vec<f64>,
    translation_only: bool,
}

impl WhiteningTransform {
    /// `T(y) = y - shift`.
    pub fn translation(shift: Vec<f64>) -> Self {
        let d = shift.len();
        let mut eye = vec![0.0; d * d];
        for i in 0..d {
            eye[i * d + i] = 1.0;
        }
        Self {
            shift,
            forward: eye.clone(),
            inverse: eye,
            translation_only: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    /// Row-major `A`.
    pub fn forward_matrix(&self) -> &[f64] {
        &self.forward
    }

    /// Row-major `A^{-1}`.
    pub fn inverse_matrix(&self) -> &[f64] {
        &self.inverse
    }

    pub fn is_translation_only(&self) -> bool {
        self.translation_only
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = y.iter().zip(&self.shift).map(|(a, b)| a - b).collect();
        mat_vec(&self.forward, &centered)
    }

    pub fn invert(&self, w: &[f64]) -> Vec<f64> {
        let mut y = mat_vec(&self.inverse, w);
        for (v, s) in y.iter_mut().zip(&self.shift) {
            *v += s;
        }
        y
    }

    /// Original-frame direction of the rounded-frame direction `u`.
    fn unround(&self, u: &[f64]) -> Vec<f64> {
        if self.translation_only {
            u.to_vec()
        } else {
            mat_vec(&self.inverse, u)
        }
    }
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let d = v.len();
    m.chunks_exact(d)
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn check_inside(cell: &InfluenceCell, z: &[f64]) -> Result<()> {
    if z.len() != cell.dim() {
        return Err(Error::DimensionMismatch {
            expected: cell.dim(),
            found: z.len(),
        });
    }
    let violation = cell.max_violation(z);
    if violation > CONTAINMENT_TOLERANCE {
        return Err(Error::OutsideCell { violation });
    }
    Ok(())
}

fn sphere_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&u);
        if n > 1e-300 {
            return u.into_iter().map(|v| v / n).collect();
        }
    }
}

fn step<R: Rng + ?Sized>(
    cell: &InfluenceCell,
    transform: &WhiteningTransform,
    z: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    let rounded = sphere_direction(cell.dim(), rng);
    let mut u = transform.unround(&rounded);
    let n = norm(&u);
    for v in &mut u {
        *v /= n;
    }
    let (lo, hi) = chord_intersect(cell, z, &u)?;
    let t = lo + (hi - lo) * rng.gen::<f64>();
    let next: Vec<f64> = z.iter().zip(&u).map(|(a, b)| a + t * b).collect();
    // Endpoint rounding can leave the cell by a few ulps; stay put instead.
    if cell.max_violation(&next) > CONTAINMENT_TOLERANCE {
        Ok(z.to_vec())
    } else {
        Ok(next)
    }
}

/// Pilot walk from `start`, then `A = Cov^{-1/2}` and `mu = mean`.
/// Falls back to a pure translation by the pilot mean when the covariance
/// is singular or worse conditioned than [`MAX_CONDITION`].
pub fn estimate_whitening<R: Rng + ?Sized>(
    cell: &InfluenceCell,
    start: &[f64],
    pilot_steps: usize,
    rng: &mut R,
) -> Result<WhiteningTransform> {
    check_inside(cell, start)?;
    let d = cell.dim();
    let identity = WhiteningTransform::translation(vec![0.0; d]);
    let mut z = start.to_vec();
    let mut mean = vec![0.0; d];
    let mut trail = Vec::with_capacity(pilot_steps * d);
    for _ in 0..pilot_steps {
        z = step(cell, &identity, &z, rng)?;
        trail.extend_from_slice(&z);
        for (m, v) in mean.iter_mut().zip(&z) {
            *m += v;
        }
    }
    if pilot_steps == 0 {
        return Ok(WhiteningTransform::translation(start.to_vec()));
    }
    for m in &mut mean {
        *m /= pilot_steps as f64;
    }
    if pilot_steps <= d {
        return Ok(WhiteningTransform::translation(mean));
    }
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for p in trail.chunks_exact(d) {
        for i in 0..d {
            let di = p[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (p[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = cov[(i, j)] / (pilot_steps - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(from_covariance(mean, cov))
}

/// `Cov^{-1/2}` about `mean`, or a translation when `cov` is too badly
/// conditioned to invert.
fn from_covariance(mean: Vec<f64>, cov: DMatrix<f64>) -> WhiteningTransform {
    let d = mean.len();
    let eig = cov.symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) || !(max / min <= MAX_CONDITION) {
        return WhiteningTransform::translation(mean);
    }
    let v = &eig.eigenvectors;
    let mut forward = vec![0.0; d * d];
    let mut inverse = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut f = 0.0;
            let mut b = 0.0;
            for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
                let s = sqrt(lambda);
                f += v[(i, k)] * v[(j, k)] / s;
                b += v[(i, k)] * v[(j, k)] * s;
            }
            forward[i * d + j] = f;
            inverse[i * d + j] = b;
        }
    }
    WhiteningTransform {
        shift: mean,
        forward,
        inverse,
        translation_only: false,
    }
}

/// One hit-and-run move from `z`: a uniform direction in the rounded frame
/// and a uniform point on the resulting chord.
pub fn hit_and_run_step<R: Rng + ?Sized>(
    cell: &InfluenceCell,
    transform: &WhiteningTransform,
    z: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if transform.dim() != cell.dim() {
        return Err(Error::DimensionMismatch {
            expected: cell.dim(),
            found: transform.dim(),
        });
    }
    check_inside(cell, z)?;
    step(cell, transform, z, rng)
}

/// Runs the full walk and hands each emitted state to `visit`.
pub(crate) fn walk<R, F>(
    cell: &InfluenceCell,
    start: &[f64],
    config: &SamplerConfig,
    rng: &mut R,
    mut visit: F,
) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]),
{
    config.validate()?;
    check_inside(cell, start)?;
    let transform = if config.whiten {
        estimate_whitening(cell, start, config.pilot_steps_for(cell.dim()), rng)?
    } else {
        WhiteningTransform::translation(start.to_vec())
    };
    let mut z = start.to_vec();
    for _ in 0..config.burn_in {
        z = step(cell, &transform, &z, rng)?;
    }
    for _ in 0..config.samples {
        z = step(cell, &transform, &z, rng)?;
        visit(&z);
    }
    Ok(())
}

/// Rounding pilot, `burn_in` discarded moves, then `samples` consecutive
/// states of the walk.
pub fn sample_polytope<R: Rng + ?Sized>(
    cell: &InfluenceCell,
    start: &[f64],
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(config.samples);
    walk(cell, start, config, rng, |z| out.push(z.to_vec()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::HalfSpace;
    use crate::rng::rng_from_seed;

    fn boxed(lower: &[f64], upper: &[f64]) -> InfluenceCell {
        let d = lower.len();
        let mut hs = Vec::new();
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            hs.push(HalfSpace::new(e.clone(), upper[i]).unwrap());
            e[i] = -1.0;
            hs.push(HalfSpace::new(e, -lower[i]).unwrap());
        }
        let mid = lower
            .iter()
            .zip(upper)
            .map(|(l, u)| (l + u) / 2.0)
            .collect();
        InfluenceCell::from_halfspaces(hs, mid).unwrap()
    }

    #[test]
    fn long_box_is_rescaled() {
        let cell = boxed(&[0.0, 0.0], &[2.0, 200.0]);
        let mut rng = rng_from_seed(3);
        let t = estimate_whitening(&cell, &[1.0, 100.0], 400, &mut rng).unwrap();
        assert!(!t.is_translation_only());
        let a = t.forward_matrix();
        let edge1 = 2.0 * (a[0] * a[0] + a[2] * a[2]).sqrt();
        let edge2 = 200.0 * (a[1] * a[1] + a[3] * a[3]).sqrt();
        let ratio = edge1 / edge2;
        assert!(ratio > 0.5 && ratio < 2.0, "mapped edge ratio {ratio}");
    }

    #[test]
    fn hypercube_whitening_is_near_isotropic() {
        let cell = boxed(&[0.0; 3], &[1.0; 3]);
        let mut rng = rng_from_seed(11);
        let t = estimate_whitening(&cell, &[0.5; 3], 2000, &mut rng).unwrap();
        for s in t.shift() {
            assert!((s - 0.5).abs() < 0.1);
        }
        // Covariance of a uniform sample after mapping should be ~identity.
        let config = SamplerConfig {
            samples: 4000,
            ..SamplerConfig::default()
        };
        let pts = sample_polytope(&cell, &[0.5; 3], &config, &mut rng).unwrap();
        let mapped: Vec<Vec<f64>> = pts.iter().map(|p| t.apply(p)).collect();
        let n = mapped.len() as f64;
        let mean: Vec<f64> = (0..3)
            .map(|i| mapped.iter().map(|p| p[i]).sum::<f64>() / n)
            .collect();
        for i in 0..3 {
            for j in 0..3 {
                let c = mapped
                    .iter()
                    .map(|p| (p[i] - mean[i]) * (p[j] - mean[j]))
                    .sum::<f64>()
                    / (n - 1.0);
                if i == j {
                    assert!((c - 1.0).abs() < 0.5, "var {i}: {c}");
                } else {
                    assert!(c.abs() < 0.2, "cov {i}{j}: {c}");
                }
            }
        }
    }

    #[test]
    fn transform_round_trips() {
        let cell = boxed(&[0.0, -1.0], &[3.0, 5.0]);
        let mut rng = rng_from_seed(5);
        let t = estimate_whitening(&cell, &[1.0, 1.0], 300, &mut rng).unwrap();
        let (a, b) = (t.forward_matrix(), t.inverse_matrix());
        for i in 0..2 {
            for j in 0..2 {
                let p: f64 = (0..2).map(|k| a[i * 2 + k] * b[k * 2 + j]).sum();
                assert!((p - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
        let y = [2.5, -0.75];
        let back = t.invert(&t.apply(&y));
        assert!((back[0] - y[0]).abs() < 1e-8 && (back[1] - y[1]).abs() < 1e-8);
    }

    #[test]
    fn ill_conditioned_covariance_falls_back_to_translation() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        let t = from_covariance(vec![0.5, 0.0], cov);
        assert!(t.is_translation_only());
        assert_eq!(t.shift(), &[0.5, 0.0]);
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-10]);
        assert!(!from_covariance(vec![0.0; 2], cov).is_translation_only());
    }

    #[test]
    fn short_pilot_falls_back_to_translation() {
        let cell = boxed(&[0.0, 0.0], &[1.0, 1.0]);
        let mut rng = rng_from_seed(1);
        assert!(estimate_whitening(&cell, &[0.5, 0.5], 2, &mut rng)
            .unwrap()
            .is_translation_only());
    }

    #[test]
    fn start_must_be_inside() {
        let cell = boxed(&[0.0, 0.0], &[1.0, 1.0]);
        let mut rng = rng_from_seed(1);
        assert!(matches!(
            estimate_whitening(&cell, &[2.0, 0.5], 10, &mut rng),
            Err(Error::OutsideCell { .. })
        ));
        let t = WhiteningTransform::translation(vec![0.0, 0.0]);
        assert!(matches!(
            hit_and_run_step(&cell, &t, &[2.0, 0.5], &mut rng),
            Err(Error::OutsideCell { .. })
        ));
    }

    #[test]
    fn steps_are_deterministic_and_closed() {
        let cell = boxed(&[0.0, 0.0], &[1.0, 1.0]);
        let t = WhiteningTransform::translation(vec![0.5, 0.5]);
        let a = hit_and_run_step(&cell, &t, &[0.5, 0.5], &mut rng_from_seed(9)).unwrap();
        let b = hit_and_run_step(&cell, &t, &[0.5, 0.5], &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
        assert!(cell.contains(&a));
    }

    #[test]
    fn one_dimensional_steps_are_uniform() {
        let cell = boxed(&[0.0], &[1.0]);
        let t = WhiteningTransform::translation(vec![0.5]);
        let mut rng = rng_from_seed(21);
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let z = hit_and_run_step(&cell, &t, &[0.5], &mut rng).unwrap();
            assert!(z[0] > 0.0 && z[0] < 1.0);
            sum += z[0];
        }
        let mean = sum / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn unit_square_samples() {
        let cell = boxed(&[0.0, 0.0], &[1.0, 1.0]);
        let config = SamplerConfig {
            seed: 4,
            ..SamplerConfig::default()
        };
        let a = sample_polytope(&cell, &[0.5, 0.5], &config, &mut rng_from_seed(4)).unwrap();
        let b = sample_polytope(&cell, &[0.5, 0.5], &config, &mut rng_from_seed(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
        assert!(a.iter().all(|p| cell.contains(p)));
        for i in 0..2 {
            let mean = a.iter().map(|p| p[i]).sum::<f64>() / a.len() as f64;
            assert!((mean - 0.5).abs() < 0.05, "coordinate {i} mean {mean}");
        }
    }

    #[test]
    fn whitening_changes_path_not_support() {
        let cell = boxed(&[0.0, 0.0], &[1.0, 30.0]);
        for whiten in [true, false] {
            let config = SamplerConfig {
                whiten,
                samples: 500,
                burn_in: 50,
                ..SamplerConfig::default()
            };
            let pts = sample_polytope(&cell, &[0.5, 15.0], &config, &mut rng_from_seed(2)).unwrap();
            assert!(pts.iter().all(|p| cell.contains(p)));
        }
    }
}
