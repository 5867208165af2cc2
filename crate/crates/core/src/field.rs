//! Affinity scores sampled on a regular 2D grid, and their level sets.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::engine::affinity_point;
use crate::error::{Error, Result};
use crate::measure::DistanceMeasure;
use crate::model::{BoundingBox, ClusterModel};
use crate::rng::derive_seed;
use crate::sampler::SamplerConfig;

/// Default contour levels.
pub const DEFAULT_LEVELS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

/// Node `(i, j)` sits at `origin + (i * spacing[0], j * spacing[1])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// `nx` by `ny` nodes spanning `[lower, upper]` inclusive.
    pub fn spanning(lower: [f64; 2], upper: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::invalid("grid", "needs at least 2 nodes per axis"));
        }
        if !(upper[0] > lower[0] && upper[1] > lower[1]) {
            return Err(Error::invalid(
                "grid",
                "upper corner must exceed lower corner",
            ));
        }
        Ok(Self {
            origin: lower,
            spacing: [
                (upper[0] - lower[0]) / (nx - 1) as f64,
                (upper[1] - lower[1]) / (ny - 1) as f64,
            ],
            nx,
            ny,
        })
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
        ]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Scores stored row by row, `j` (the y index) outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFieldGrid {
    spec: GridSpec,
    scores: Vec<f64>,
}

impl ScalarFieldGrid {
    pub fn new(spec: GridSpec, scores: Vec<f64>) -> Result<Self> {
        if spec.nx < 2 || spec.ny < 2 {
            return Err(Error::invalid("grid", "needs at least 2 nodes per axis"));
        }
        if scores.len() != spec.len() {
            return Err(Error::LengthMismatch {
                left: spec.len(),
                right: scores.len(),
            });
        }
        if scores.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::invalid("score", "must lie in [0, 1]"));
        }
        Ok(Self { spec, scores })
    }

    /// Grid of an arbitrary function, clamped to `[0, 1]`.
    pub fn from_fn<F: FnMut([f64; 2]) -> f64>(spec: GridSpec, mut f: F) -> Result<Self> {
        let mut scores = Vec::with_capacity(spec.len());
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                scores.push(f(spec.node(i, j)).clamp(0.0, 1.0));
            }
        }
        Self::new(spec, scores)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn score(&self, i: usize, j: usize) -> f64 {
        self.scores[j * self.spec.nx + i]
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Fraction of nodes scoring strictly below 1.
    pub fn unstable_fraction(&self) -> f64 {
        self.scores.iter().filter(|&&s| s < 1.0).count() as f64 / self.scores.len() as f64
    }
}

/// Scores every node as a query point. Node `j * nx + i` uses seed
/// `derive_seed(config.seed, j * nx + i)`.
pub fn evaluate_affinity_field(
    model: &ClusterModel,
    measure: &DistanceMeasure,
    bounds: &BoundingBox,
    config: &SamplerConfig,
    spec: GridSpec,
) -> Result<ScalarFieldGrid> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: model.dim(),
        });
    }
    let node = |index: usize| {
        let p = spec.node(index % spec.nx, index / spec.nx);
        let cfg = config.with_seed(derive_seed(config.seed, index as u64));
        affinity_point(&p, model, measure, bounds, &cfg)
            .map(|a| a.score)
            .map_err(|e| e.at(index))
    };
    #[cfg(feature = "parallel")]
    let scores: Result<Vec<f64>> = {
        use rayon::prelude::*;
        (0..spec.len()).into_par_iter().map(node).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let scores: Result<Vec<f64>> = (0..spec.len()).map(node).collect();
    ScalarFieldGrid::new(spec, scores?)
}

/// Grid edge identifier: horizontal edges run from node `(i, j)` to
/// `(i + 1, j)`, vertical ones from `(i, j)` to `(i, j + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Connected piece of a level set.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    /// First and last points coincide (the last point is not repeated).
    pub closed: bool,
}

/// All contour segments for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourLevel {
    pub level: f64,
    pub segments: Vec<[[f64; 2]; 2]>,
    pub polylines: Vec<Polyline>,
}

fn crossing(grid: &ScalarFieldGrid, level: f64, edge: Edge) -> [f64; 2] {
    let ((ai, aj), (bi, bj)) = match edge {
        Edge::H(i, j) => ((i, j), (i + 1, j)),
        Edge::V(i, j) => ((i, j), (i, j + 1)),
    };
    let (va, vb) = (grid.score(ai, aj), grid.score(bi, bj));
    let t = (level - va) / (vb - va);
    let (pa, pb) = (grid.spec.node(ai, aj), grid.spec.node(bi, bj));
    [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
}

/// Marching squares. A node is "above" when its score is `>= level`.
/// Saddle cells are split by the average of their four corners: when the
/// average is above, the two below-corners are cut off, otherwise the two
/// above-corners are.
pub fn extract_contours(grid: &ScalarFieldGrid, levels: &[f64]) -> Result<Vec<ContourLevel>> {
    if levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(Error::invalid("levels", "must lie in (0, 1)"));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("levels", "must be strictly increasing"));
    }
    let (nx, ny) = (grid.spec.nx, grid.spec.ny);
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut pairs: Vec<(Edge, Edge)> = Vec::new();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let v = [
                    grid.score(i, j),
                    grid.score(i + 1, j),
                    grid.score(i + 1, j + 1),
                    grid.score(i, j + 1),
                ];
                let above = v.map(|s| s >= level);
                let bottom = Edge::H(i, j);
                let right = Edge::V(i + 1, j);
                let top = Edge::H(i, j + 1);
                let left = Edge::V(i, j);
                let case = above
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (b, &a)| acc | ((a as u8) << b));
                match case {
                    0 | 15 => {}
                    1 | 14 => pairs.push((left, bottom)),
                    2 | 13 => pairs.push((bottom, right)),
                    4 | 11 => pairs.push((right, top)),
                    8 | 7 => pairs.push((top, left)),
                    3 | 12 => pairs.push((left, right)),
                    6 | 9 => pairs.push((bottom, top)),
                    5 | 10 => {
                        let center_above = (v[0] + v[1] + v[2] + v[3]) / 4.0 >= level;
                        // Case 5: corners 0 and 2 above.
                        let cut_corners_0_2 = (case == 5) != center_above;
                        if cut_corners_0_2 {
                            pairs.push((left, bottom));
                            pairs.push((right, top));
                        } else {
                            pairs.push((bottom, right));
                            pairs.push((top, left));
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
        let mut points = BTreeMap::new();
        for &(a, b) in &pairs {
            for e in [a, b] {
                points.entry(e).or_insert_with(|| crossing(grid, level, e));
            }
        }
        let segments = pairs.iter().map(|(a, b)| [points[a], points[b]]).collect();
        let polylines = chain(&pairs, &points);
        out.push(ContourLevel {
            level,
            segments,
            polylines,
        });
    }
    Ok(out)
}

/// Joins segments that share an edge crossing.
fn chain(pairs: &[(Edge, Edge)], points: &BTreeMap<Edge, [f64; 2]>) -> Vec<Polyline> {
    let mut incident: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for (s, (a, b)) in pairs.iter().enumerate() {
        incident.entry(*a).or_default().push(s);
        incident.entry(*b).or_default().push(s);
    }
    let mut used = vec![false; pairs.len()];
    let mut lines = Vec::new();
    let trace = |start: Edge, first: usize, used: &mut Vec<bool>| -> (Vec<Edge>, bool) {
        let mut path = vec![start];
        let mut at = start;
        let mut seg = first;
        loop {
            used[seg] = true;
            let (a, b) = pairs[seg];
            let next = if a == at { b } else { a };
            if next == start {
                return (path, true);
            }
            path.push(next);
            at = next;
            match incident[&at].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => return (path, false),
            }
        }
    };
    // Open chains start at boundary crossings seen by a single segment.
    let ends: Vec<Edge> = incident
        .iter()
        .filter(|(_, segs)| segs.len() == 1)
        .map(|(e, _)| *e)
        .collect();
    for e in ends {
        let s = incident[&e][0];
        if !used[s] {
            let (path, closed) = trace(e, s, &mut used);
            lines.push((path, closed));
        }
    }
    for s in 0..pairs.len() {
        if !used[s] {
            let (path, closed) = trace(pairs[s].0, s, &mut used);
            lines.push((path, closed));
        }
    }
    lines
        .into_iter()
        .map(|(path, closed)| Polyline {
            points: path.iter().map(|e| points[e]).collect(),
            closed,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sqrt;
    use libm::exp;

    fn radial(n: usize) -> ScalarFieldGrid {
        let spec = GridSpec::spanning([-3.0, -3.0], [3.0, 3.0], n, n).unwrap();
        ScalarFieldGrid::from_fn(spec, |p| 1.0 - exp(-sqrt(p[0] * p[0] + p[1] * p[1]))).unwrap()
    }

    #[test]
    fn constant_field_has_no_contours() {
        let spec = GridSpec::spanning([0.0, 0.0], [1.0, 1.0], 5, 5).unwrap();
        let grid = ScalarFieldGrid::from_fn(spec, |_| 0.7).unwrap();
        let c = extract_contours(&grid, &[0.3, 0.9]).unwrap();
        assert!(c.iter().all(|l| l.segments.is_empty()));
    }

    #[test]
    fn radial_level_is_a_closed_loop() {
        let grid = radial(41);
        let c = extract_contours(&grid, &[0.6]).unwrap();
        let level = &c[0];
        assert!(!level.segments.is_empty());
        assert_eq!(level.polylines.len(), 1);
        let loop_ = &level.polylines[0];
        assert!(loop_.closed);
        assert_eq!(loop_.points.len(), level.segments.len());
        // Every segment's endpoints coincide with a neighbor's.
        for s in &level.segments {
            for p in s {
                let shared = level
                    .segments
                    .iter()
                    .flat_map(|t| t.iter())
                    .filter(|q| (q[0] - p[0]).abs() < 1e-9 && (q[1] - p[1]).abs() < 1e-9)
                    .count();
                assert_eq!(shared, 2);
            }
        }
        // r = -ln(0.4) on the level set.
        let r = -(0.4f64).ln();
        for p in &loop_.points {
            let rp = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((rp - r).abs() < 0.05, "{rp} vs {r}");
        }
    }

    #[test]
    fn endpoints_interpolate_between_nodes() {
        let grid = radial(17);
        let c = extract_contours(&grid, &[0.5, 0.8]).unwrap();
        let spec = grid.spec();
        for level in &c {
            for p in level.segments.iter().flat_map(|s| s.iter()) {
                let fi = (p[0] - spec.origin[0]) / spec.spacing[0];
                let fj = (p[1] - spec.origin[1]) / spec.spacing[1];
                let on_vertical = (fi - fi.round()).abs() < 1e-9;
                let on_horizontal = (fj - fj.round()).abs() < 1e-9;
                assert!(on_vertical || on_horizontal);
                let (a, b) = if on_vertical {
                    let i = fi.round() as usize;
                    (
                        grid.score(i, fj.floor() as usize),
                        grid.score(i, fj.ceil() as usize),
                    )
                } else {
                    let j = fj.round() as usize;
                    (
                        grid.score(fi.floor() as usize, j),
                        grid.score(fi.ceil() as usize, j),
                    )
                };
                assert!(a.min(b) <= level.level && level.level <= a.max(b));
            }
        }
    }

    #[test]
    fn saddle_uses_cell_average() {
        let spec = GridSpec::spanning([0.0, 0.0], [1.0, 1.0], 2, 2).unwrap();
        // Corners 0 and 2 high; average 0.55 >= 0.5 keeps them connected.
        let grid = ScalarFieldGrid::new(spec, vec![0.9, 0.2, 0.2, 0.9]).unwrap();
        let c = extract_contours(&grid, &[0.5]).unwrap();
        assert_eq!(c[0].segments.len(), 2);
        for s in &c[0].segments {
            // Each segment cuts off a low corner: (1,0) or (0,1).
            let mid = [(s[0][0] + s[1][0]) / 2.0, (s[0][1] + s[1][1]) / 2.0];
            assert!((mid[0] > 0.5) != (mid[1] > 0.5));
        }
        let grid = ScalarFieldGrid::new(spec, vec![0.6, 0.1, 0.1, 0.6]).unwrap();
        let c = extract_contours(&grid, &[0.5]).unwrap();
        for s in &c[0].segments {
            let mid = [(s[0][0] + s[1][0]) / 2.0, (s[0][1] + s[1][1]) / 2.0];
            assert!((mid[0] > 0.5) == (mid[1] > 0.5));
        }
    }

    #[test]
    fn level_validation() {
        let grid = radial(5);
        assert!(extract_contours(&grid, &[0.5, 0.5]).is_err());
        assert!(extract_contours(&grid, &[0.0]).is_err());
        assert!(extract_contours(&grid, &[0.7, 0.6]).is_err());
    }

    #[test]
    fn single_cluster_field_is_flat() {
        let model = ClusterModel::new(vec![vec![0.0, 0.0]]).unwrap();
        let bounds = BoundingBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let spec = GridSpec::spanning([-1.0, -1.0], [1.0, 1.0], 4, 3).unwrap();
        let config = SamplerConfig {
            samples: 50,
            burn_in: 20,
            ..SamplerConfig::default()
        };
        let grid = evaluate_affinity_field(
            &model,
            &DistanceMeasure::SquaredEuclidean,
            &bounds,
            &config,
            spec,
        )
        .unwrap();
        assert!(grid.scores().iter().all(|&s| s == 1.0));
    }
}
