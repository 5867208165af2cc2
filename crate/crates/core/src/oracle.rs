//! Reference affinities that do not sample: exact polygon areas in 2D and
//! a deterministic grid count in up to four dimensions.

use alloc::vec;
use alloc::vec::Vec;

use crate::cell::{bisector_halfspace, build_influence_cell, steal_owner, HalfSpace};
use crate::engine::AffinityVector;
use crate::error::{Error, Result};
use crate::math::{abs, ceil, dot, floor};
use crate::measure::DistanceMeasure;
use crate::model::{BoundingBox, ClusterModel};

/// Convex polygon with counter-clockwise vertices; possibly empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
}

impl ConvexPolygon {
    /// Takes vertices in counter-clockwise order. Convexity is not checked.
    pub fn new(vertices: Vec<[f64; 2]>) -> Self {
        Self { vertices }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rectangle(lower: [f64; 2], upper: [f64; 2]) -> Self {
        Self::new(vec![
            lower,
            [upper[0], lower[1]],
            upper,
            [lower[0], upper[1]],
        ])
    }

    pub fn from_box(bounds: &BoundingBox) -> Result<Self> {
        if bounds.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: bounds.dim(),
            });
        }
        let (l, u) = (bounds.lower(), bounds.upper());
        Ok(Self::rectangle([l[0], l[1]], [u[0], u[1]]))
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn area(&self) -> f64 {
        polygon_area(self)
    }

    pub fn clip(&self, h: &HalfSpace) -> Self {
        clip_polygon(self, h)
    }
}

/// Intersection of a convex polygon with a halfplane (one
/// Sutherland-Hodgman pass).
pub fn clip_polygon(poly: &ConvexPolygon, h: &HalfSpace) -> ConvexPolygon {
    let n = poly.vertices.len();
    if n == 0 {
        return ConvexPolygon::empty();
    }
    let side = |p: &[f64; 2]| dot(h.normal(), p) - h.offset();
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(n + 1);
    for i in 0..n {
        let a = poly.vertices[i];
        let b = poly.vertices[(i + 1) % n];
        let (sa, sb) = (side(&a), side(&b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out.dedup();
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    if out.len() < 3 {
        return ConvexPolygon::empty();
    }
    ConvexPolygon::new(out)
}

/// Shoelace area; 0 for empty or degenerate polygons.
pub fn polygon_area(poly: &ConvexPolygon) -> f64 {
    let v = &poly.vertices;
    if v.len() < 3 {
        return 0.0;
    }
    let twice: f64 = (0..v.len())
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    abs(twice) / 2.0
}

/// The query's cell and the part of it stolen from each cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct StolenRegions {
    pub cell: ConvexPolygon,
    pub stolen: Vec<ConvexPolygon>,
}

/// Clips the box to the query's cell, then the cell to each cluster's
/// former region.
pub fn stolen_regions_2d(
    x: &[f64],
    model: &ClusterModel,
    measure: &DistanceMeasure,
    bounds: &BoundingBox,
) -> Result<StolenRegions> {
    let mut cell = ConvexPolygon::from_box(bounds)?;
    if let Some(floor) = measure.domain_floor() {
        for axis in 0..2 {
            let mut e = vec![0.0; 2];
            e[axis] = -1.0;
            cell = cell.clip(&HalfSpace::new(e, -floor)?);
        }
    }
    for (j, c) in model.representatives().enumerate() {
        let h = bisector_halfspace(x, model.query_weight(), c, model.weight(j), measure)?;
        cell = cell.clip(&h);
    }
    let mut stolen = Vec::with_capacity(model.k());
    for i in 0..model.k() {
        let mut part = cell.clone();
        for j in (0..model.k()).filter(|&j| j != i) {
            let h = bisector_halfspace(
                model.representative(i),
                model.weight(i),
                model.representative(j),
                model.weight(j),
                measure,
            )?;
            part = part.clip(&h);
        }
        stolen.push(part);
    }
    Ok(StolenRegions { cell, stolen })
}

/// Exact 2D affinity under the (power-weighted) squared Euclidean measure.
pub fn exact_affinity_2d(
    x: &[f64],
    model: &ClusterModel,
    bounds: &BoundingBox,
) -> Result<AffinityVector> {
    exact_affinity_2d_with(x, model, &DistanceMeasure::SquaredEuclidean, bounds)
}

/// Exact 2D affinity under any supported measure; every bisector is a line.
pub fn exact_affinity_2d_with(
    x: &[f64],
    model: &ClusterModel,
    measure: &DistanceMeasure,
    bounds: &BoundingBox,
) -> Result<AffinityVector> {
    for found in [model.dim(), x.len(), bounds.dim()] {
        if found != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found });
        }
    }
    measure.check_domain(x)?;
    if let Some(i) = model.coincident_representative(x) {
        return Ok(AffinityVector::indicator(model.k(), i));
    }
    if !bounds.contains(x) {
        return Err(Error::QueryOutsideBox);
    }
    let regions = stolen_regions_2d(x, model, measure, bounds)?;
    let areas: Vec<f64> = regions.stolen.iter().map(polygon_area).collect();
    let total: f64 = areas.iter().sum();
    if !(total > 1e-14 * bounds.volume()) {
        return Ok(AffinityVector::indicator(
            model.k(),
            steal_owner(x, model, measure)?,
        ));
    }
    let (l, u) = (bounds.lower(), bounds.upper());
    let tol = 1e-9 * (u[0] - l[0]).max(u[1] - l[1]);
    let clipped = regions
        .cell
        .vertices()
        .iter()
        .any(|p| (0..2).any(|a| abs(p[a] - l[a]) <= tol || abs(p[a] - u[a]) <= tol));
    AffinityVector::from_alphas(areas.iter().map(|a| a / total).collect(), clipped)
}

/// Adds one vote for the owner of `y`, split evenly between sites tied to
/// within rounding. Symmetric grids put many nodes exactly on bisectors, and
/// a fixed tie-break there would bias the estimate.
fn vote(
    y: &[f64],
    model: &ClusterModel,
    measure: &DistanceMeasure,
    scores: &mut [f64],
    counts: &mut [f64],
) {
    let mut best = f64::INFINITY;
    for (j, c) in model.representatives().enumerate() {
        scores[j] = measure.divergence(y, c) - model.weight(j);
        best = best.min(scores[j]);
    }
    let tol = 1e-12 * (1.0 + abs(best));
    let tied = scores.iter().filter(|&&s| s - best <= tol).count() as f64;
    for (count, &s) in counts.iter_mut().zip(scores.iter()) {
        if s - best <= tol {
            *count += 1.0 / tied;
        }
    }
}

/// Deterministic grid estimate: the cell's axis-aligned extent is split
/// into `resolution` slabs per axis and every slab-center inside the cell
/// votes for its owner.
pub fn grid_affinity(
    x: &[f64],
    model: &ClusterModel,
    measure: &DistanceMeasure,
    resolution: usize,
    bounds: &BoundingBox,
) -> Result<AffinityVector> {
    let d = model.dim();
    if d > 4 {
        return Err(Error::invalid(
            "dimension",
            "grid oracle supports at most 4",
        ));
    }
    if resolution < 16 {
        return Err(Error::invalid("resolution", "must be at least 16"));
    }
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    measure.check_domain(x)?;
    if let Some(i) = model.coincident_representative(x) {
        return Ok(AffinityVector::indicator(model.k(), i));
    }
    let cell = build_influence_cell(x, model, measure, bounds)?;
    let mut lower = Vec::with_capacity(d);
    let mut step = Vec::with_capacity(d);
    for axis in 0..d {
        let (lo, hi) = cell.extent(axis).ok_or(Error::EmptyCell)?;
        lower.push(lo);
        step.push((hi - lo) / resolution as f64);
    }
    let last = d - 1;
    let mut counts = vec![0.0f64; model.k()];
    let mut scores = vec![0.0f64; model.k()];
    let lines = resolution.pow(last as u32);
    let mut y = vec![0.0; d];
    for line in 0..lines {
        let mut rest = line;
        for axis in 0..last {
            y[axis] = lower[axis] + ((rest % resolution) as f64 + 0.5) * step[axis];
            rest /= resolution;
        }
        // Range of the last coordinate along this line inside the cell.
        y[last] = 0.0;
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for h in cell.halfspaces() {
            let rate = h.normal()[last];
            let room = h.offset() - dot(h.normal(), &y);
            if rate > 0.0 {
                hi = hi.min(room / rate);
            } else if rate < 0.0 {
                lo = lo.max(room / rate);
            } else if room < 0.0 {
                hi = f64::NEG_INFINITY;
            }
        }
        if !(lo <= hi) {
            continue;
        }
        let first = ceil((lo - lower[last]) / step[last] - 0.5).max(0.0) as usize;
        let stop = floor((hi - lower[last]) / step[last] - 0.5);
        if stop < 0.0 {
            continue;
        }
        let stop = (stop as usize).min(resolution - 1);
        for m in first..=stop {
            y[last] = lower[last] + (m as f64 + 0.5) * step[last];
            vote(&y, model, measure, &mut scores, &mut counts);
        }
    }
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return Err(Error::EmptyCell);
    }
    AffinityVector::from_alphas(counts.iter().map(|&c| c / total).collect(), cell.clipped())
}
