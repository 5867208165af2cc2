//! Halfspace algebra for a query point's influence cell.
//!
//! The cell of a query `x` is everything that would switch to `x` if `x`
//! were added as a new site: one bisector halfspace per representative,
//! intersected with a bounding box (so the cell is always bounded) and,
//! for generators on the positive orthant, the domain floor.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp;
use crate::math::{all_finite, dist, dot, norm};
use crate::measure::DistanceMeasure;
use crate::model::{BoundingBox, ClusterModel, COINCIDENCE_TOLERANCE};

/// Absolute slack allowed when testing membership.
pub const CONTAINMENT_TOLERANCE: f64 = 1e-9;

/// `{ y : <normal, y> <= offset }`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    normal: Vec<f64>,
    offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if !all_finite(&normal) || !offset.is_finite() {
            return Err(Error::NonFinite("halfspace"));
        }
        if normal.iter().all(|&a| a == 0.0) {
            return Err(Error::ZeroNormal);
        }
        Ok(Self { normal, offset })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `<normal, y> - offset`; positive outside.
    pub fn violation(&self, y: &[f64]) -> f64 {
        dot(&self.normal, y) - self.offset
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.violation(y) <= CONTAINMENT_TOLERANCE
    }
}

/// Where a face of an [`InfluenceCell`] comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    /// Bisector between the query and representative `i`.
    Site(usize),
    BoxLower(usize),
    BoxUpper(usize),
    /// Positive-orthant floor on coordinate `i`.
    Domain(usize),
    /// Supplied directly by the caller.
    Other,
}

/// Bounded convex polytope holding the query's region of influence.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceCell {
    halfspaces: Vec<HalfSpace>,
    kinds: Vec<FaceKind>,
    query: Vec<f64>,
    interior: Vec<f64>,
    clipped: bool,
}

impl InfluenceCell {
    /// Cell from raw halfspaces. `interior` must satisfy all of them; it is
    /// used both as the query and as the starting point for walks.
    pub fn from_halfspaces(halfspaces: Vec<HalfSpace>, interior: Vec<f64>) -> Result<Self> {
        if halfspaces.is_empty() {
            return Err(Error::Empty("halfspaces"));
        }
        if let Some(h) = halfspaces.iter().find(|h| h.dim() != interior.len()) {
            return Err(Error::DimensionMismatch {
                expected: interior.len(),
                found: h.dim(),
            });
        }
        let kinds = alloc::vec![FaceKind::Other; halfspaces.len()];
        let cell = Self {
            halfspaces,
            kinds,
            query: interior.clone(),
            interior,
            clipped: false,
        };
        let violation = cell.max_violation(&cell.interior);
        if violation > CONTAINMENT_TOLERANCE {
            return Err(Error::OutsideCell { violation });
        }
        Ok(cell)
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn kinds(&self) -> &[FaceKind] {
        &self.kinds
    }

    pub fn dim(&self) -> usize {
        self.interior.len()
    }

    /// The query point the cell was built for.
    pub fn query(&self) -> &[f64] {
        &self.query
    }

    /// A point satisfying every halfspace. Equals the query unless the
    /// query lies outside its own (power-weighted) cell.
    pub fn interior_point(&self) -> &[f64] {
        &self.interior
    }

    /// Whether any bounding-box face touches the cell.
    pub fn clipped(&self) -> bool {
        self.clipped
    }

    pub fn max_violation(&self, y: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.violation(y))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        cell_contains(self, y)
    }

    /// Range of coordinate `axis` over the cell.
    pub fn extent(&self, axis: usize) -> Option<(f64, f64)> {
        let mut e = alloc::vec![0.0; self.dim()];
        e[axis] = 1.0;
        let hi = lp::support(&self.halfspaces, &self.interior, &e)?;
        e[axis] = -1.0;
        let lo = -lp::support(&self.halfspaces, &self.interior, &e)?;
        Some((lo, hi))
    }
}

/// Halfspace of points `y` with `D(y, x) - w_x <= D(y, c) - w_c`.
pub fn bisector_halfspace(
    x: &[f64],
    w_x: f64,
    c: &[f64],
    w_c: f64,
    measure: &DistanceMeasure,
) -> Result<HalfSpace> {
    if x.len() != c.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: c.len(),
        });
    }
    if !all_finite(x) || !all_finite(c) {
        return Err(Error::NonFinite("site"));
    }
    let separation = dist(x, c);
    if separation < COINCIDENCE_TOLERANCE {
        return Err(Error::CoincidentSites { separation });
    }
    measure.check_domain(x)?;
    measure.check_domain(c)?;
    let (normal, base) = if measure.is_euclidean() {
        let normal = x.iter().zip(c).map(|(xi, ci)| 2.0 * (ci - xi)).collect();
        (normal, dot(c, c) - dot(x, x))
    } else {
        let (a_x, g_x) = measure.site_form(x);
        let (a_c, g_c) = measure.site_form(c);
        let normal = a_x.iter().zip(&a_c).map(|(p, q)| p - q).collect();
        (normal, g_c - g_x)
    };
    match HalfSpace::new(normal, base + (w_x - w_c)) {
        Err(Error::ZeroNormal) => Err(Error::CoincidentSites { separation }),
        other => other,
    }
}

/// Intersects the bisectors of `x` against every representative with the
/// box faces and, when the measure needs it, the domain floor.
pub fn build_influence_cell(
    x: &[f64],
    model: &ClusterModel,
    measure: &DistanceMeasure,
    bounds: &BoundingBox,
) -> Result<InfluenceCell> {
    let d = model.dim();
    for found in [x.len(), bounds.dim()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    if !all_finite(x) {
        return Err(Error::NonFinite("query"));
    }
    measure.check_domain(x)?;
    if !bounds.contains(x) {
        return Err(Error::QueryOutsideBox);
    }

    let mut halfspaces = Vec::with_capacity(model.k() + 3 * d);
    let mut kinds = Vec::with_capacity(model.k() + 3 * d);
    for (j, c) in model.representatives().enumerate() {
        halfspaces.push(bisector_halfspace(
            x,
            model.query_weight(),
            c,
            model.weight(j),
            measure,
        )?);
        kinds.push(FaceKind::Site(j));
    }
    for axis in 0..d {
        let mut e = alloc::vec![0.0; d];
        e[axis] = 1.0;
        halfspaces.push(HalfSpace::new(e.clone(), bounds.upper()[axis])?);
        kinds.push(FaceKind::BoxUpper(axis));
        e[axis] = -1.0;
        halfspaces.push(HalfSpace::new(e.clone(), -bounds.lower()[axis])?);
        kinds.push(FaceKind::BoxLower(axis));
        if let Some(floor) = measure.domain_floor() {
            halfspaces.push(HalfSpace::new(e, -floor)?);
            kinds.push(FaceKind::Domain(axis));
        }
    }

    let scale = bounds
        .lower()
        .iter()
        .zip(bounds.upper())
        .map(|(l, u)| u - l)
        .fold(0.0, f64::max);
    let depth = halfspaces
        .iter()
        .map(|h| -h.violation(x) / norm(h.normal()))
        .fold(f64::INFINITY, f64::min);
    let interior = if depth > CONTAINMENT_TOLERANCE {
        x.to_vec()
    } else {
        match lp::chebyshev_center(&halfspaces, x) {
            Some((center, radius)) if radius > 1e-10 * scale => center,
            _ => return Err(Error::EmptyCell),
        }
    };

    let mut clipped = false;
    for (h, kind) in halfspaces.iter().zip(&kinds) {
        if matches!(kind, FaceKind::BoxLower(_) | FaceKind::BoxUpper(_)) {
            let reach = lp::support(&halfspaces, &interior, h.normal()).unwrap_or(f64::INFINITY);
            if reach >= h.offset() - CONTAINMENT_TOLERANCE * scale.max(1.0) {
                clipped = true;
                break;
            }
        }
    }

    Ok(InfluenceCell {
        halfspaces,
        kinds,
        query: x.to_vec(),
        interior,
        clipped,
    })
}

/// True iff `y` satisfies every halfspace within [`CONTAINMENT_TOLERANCE`].
pub fn cell_contains(cell: &InfluenceCell, y: &[f64]) -> bool {
    y.len() == cell.dim() && cell.halfspaces.iter().all(|h| h.contains(y))
}

/// Parameter range `[t_min, t_max]` of the line `z + t u` inside the cell.
pub fn chord_intersect(cell: &InfluenceCell, z: &[f64], u: &[f64]) -> Result<(f64, f64)> {
    if z.len() != cell.dim() || u.len() != cell.dim() {
        return Err(Error::DimensionMismatch {
            expected: cell.dim(),
            found: if z.len() != cell.dim() {
                z.len()
            } else {
                u.len()
            },
        });
    }
    let mut t_min = f64::NEG_INFINITY;
    let mut t_max = f64::INFINITY;
    for h in &cell.halfspaces {
        let violation = h.violation(z);
        if violation > CONTAINMENT_TOLERANCE {
            return Err(Error::OutsideCell { violation });
        }
        let slack = (-violation).max(0.0);
        let rate = dot(h.normal(), u);
        if rate > 0.0 {
            t_max = t_max.min(slack / rate);
        } else if rate < 0.0 {
            t_min = t_min.max(slack / rate);
        }
    }
    if !t_min.is_finite() || !t_max.is_finite() {
        return Err(Error::UnboundedChord);
    }
    Ok((t_min, t_max))
}

/// Index `j` minimizing `D(y, c_j) - w_j`; ties go to the lowest index.
pub fn steal_owner(y: &[f64], model: &ClusterModel, measure: &DistanceMeasure) -> Result<usize> {
    if y.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: y.len(),
        });
    }
    measure.check_domain(y)?;
    Ok(owner_unchecked(y, model, measure))
}

pub(crate) fn owner_unchecked(y: &[f64], model: &ClusterModel, measure: &DistanceMeasure) -> usize {
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (j, c) in model.representatives().enumerate() {
        let score = measure.divergence(y, c) - model.weight(j);
        if score < best_score {
            best = j;
            best_score = score;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Generator;
    use alloc::vec;

    fn unit_square() -> InfluenceCell {
        InfluenceCell::from_halfspaces(
            vec![
                HalfSpace::new(vec![1.0, 0.0], 1.0).unwrap(),
                HalfSpace::new(vec![-1.0, 0.0], 0.0).unwrap(),
                HalfSpace::new(vec![0.0, 1.0], 1.0).unwrap(),
                HalfSpace::new(vec![0.0, -1.0], 0.0).unwrap(),
            ],
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    /// Solves `D(y,x) - w_x = D(y,c) - w_c` numerically along a line and
    /// checks the root lands on the halfspace boundary.
    fn boundary_agrees(h: &HalfSpace, x: &[f64], wx: f64, c: &[f64], wc: f64, m: &DistanceMeasure) {
        let gap = |y: &[f64]| m.divergence(y, x) - wx - (m.divergence(y, c) - wc);
        let mid: Vec<f64> = x.iter().zip(c).map(|(a, b)| (a + b) / 2.0).collect();
        let dir: Vec<f64> = x.iter().zip(c).map(|(a, b)| b - a).collect();
        let at = |t: f64| -> Vec<f64> { mid.iter().zip(&dir).map(|(p, q)| p + t * q).collect() };
        let (mut lo, mut hi) = (-0.49, 0.49);
        assert!(gap(&at(lo)) < 0.0 && gap(&at(hi)) > 0.0);
        for _ in 0..200 {
            let t = (lo + hi) / 2.0;
            if gap(&at(t)) < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
        }
        assert!(h.violation(&at(lo)).abs() < 1e-9 * norm(h.normal()));
    }

    #[test]
    fn midpoint_bisector() {
        let h = bisector_halfspace(
            &[0.0, 0.0],
            0.0,
            &[2.0, 0.0],
            0.0,
            &DistanceMeasure::SquaredEuclidean,
        )
        .unwrap();
        assert_eq!(h.normal(), &[4.0, 0.0]);
        assert_eq!(h.offset(), 4.0);
    }

    #[test]
    fn power_bisector_moves_toward_lighter_site() {
        let m = DistanceMeasure::SquaredEuclidean;
        let h = bisector_halfspace(&[0.0, 0.0], 1.0, &[2.0, 0.0], 0.0, &m).unwrap();
        assert_eq!(h.offset() / h.normal()[0], 1.25);
        let y = [1.25, 3.0];
        assert!(
            (m.divergence(&y, &[0.0, 0.0]) - 1.0 - m.divergence(&y, &[2.0, 0.0])).abs() < 1e-12
        );
        boundary_agrees(&h, &[0.0, 0.0], 1.0, &[2.0, 0.0], 0.0, &m);
    }

    #[test]
    fn kl_bisector_is_linear() {
        let e = core::f64::consts::E;
        let m = DistanceMeasure::Bregman(Generator::GeneralizedKl);
        let h = bisector_halfspace(&[1.0, 1.0], 0.0, &[e, e], 0.0, &m).unwrap();
        let scale = h.normal()[0];
        assert!((h.normal()[1] / scale - 1.0).abs() < 1e-12);
        assert!((h.offset() / scale - (2.0 * e - 2.0)).abs() < 1e-12);
        assert!((h.offset() / scale - 3.4366).abs() < 1e-4);
        boundary_agrees(&h, &[1.0, 1.0], 0.0, &[e, e], 0.0, &m);
        let is = DistanceMeasure::Bregman(Generator::ItakuraSaito);
        let h = bisector_halfspace(&[1.0, 2.0], 0.3, &[2.5, 0.5], 0.1, &is).unwrap();
        boundary_agrees(&h, &[1.0, 2.0], 0.3, &[2.5, 0.5], 0.1, &is);
    }

    #[test]
    fn bisector_errors() {
        let m = DistanceMeasure::SquaredEuclidean;
        assert!(matches!(
            bisector_halfspace(&[1.0, 1.0], 0.0, &[1.0, 1.0], 0.0, &m),
            Err(Error::CoincidentSites { .. })
        ));
        let kl = DistanceMeasure::Bregman(Generator::GeneralizedKl);
        assert_eq!(
            bisector_halfspace(&[-1.0, 1.0], 0.0, &[1.0, 2.0], 0.0, &kl),
            Err(Error::OutsideDomain)
        );
    }

    #[test]
    fn two_center_cell() {
        let model = ClusterModel::new(vec![vec![0.0, 0.0], vec![10.0, 0.0]]).unwrap();
        let bounds = BoundingBox::new(vec![-20.0, -20.0], vec![20.0, 20.0]).unwrap();
        let cell = build_influence_cell(
            &[2.0, 0.0],
            &model,
            &DistanceMeasure::SquaredEuclidean,
            &bounds,
        )
        .unwrap();
        let (lo, hi) = cell.extent(0).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 6.0).abs() < 1e-12);
        let (lo, hi) = cell.extent(1).unwrap();
        assert!((lo + 20.0).abs() < 1e-12 && (hi - 20.0).abs() < 1e-12);
        assert!(cell.clipped());
        assert!(cell.contains(&[2.0, 0.0]));
        assert_eq!(cell.interior_point(), &[2.0, 0.0]);
    }

    #[test]
    fn single_competitor_cell() {
        let model = ClusterModel::new(vec![vec![3.0]]).unwrap();
        let bounds = BoundingBox::new(vec![-5.0], vec![5.0]).unwrap();
        let cell =
            build_influence_cell(&[1.0], &model, &DistanceMeasure::SquaredEuclidean, &bounds)
                .unwrap();
        assert_eq!(cell.halfspaces().len(), 3);
        let (lo, hi) = cell.extent(0).unwrap();
        assert!((lo + 5.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cell_errors() {
        let model = ClusterModel::new(vec![vec![0.0, 0.0], vec![10.0, 0.0]]).unwrap();
        let bounds = BoundingBox::new(vec![-20.0, -20.0], vec![20.0, 20.0]).unwrap();
        let m = DistanceMeasure::SquaredEuclidean;
        assert!(matches!(
            build_influence_cell(&[0.0, 0.0], &model, &m, &bounds),
            Err(Error::CoincidentSites { .. })
        ));
        assert_eq!(
            build_influence_cell(&[30.0, 0.0], &model, &m, &bounds),
            Err(Error::QueryOutsideBox)
        );
    }

    #[test]
    fn heavy_neighbor_moves_interior_point() {
        // x sits inside c's power disk, so x is not in its own cell but the
        // cell is still a nonempty halfplane slab.
        let model = ClusterModel::new(vec![vec![0.0, 0.0], vec![10.0, 0.0]])
            .unwrap()
            .with_weights(vec![4.0, 0.0], 0.0)
            .unwrap();
        let bounds = BoundingBox::new(vec![-20.0, -20.0], vec![20.0, 20.0]).unwrap();
        let cell = build_influence_cell(
            &[1.0, 0.0],
            &model,
            &DistanceMeasure::SquaredEuclidean,
            &bounds,
        )
        .unwrap();
        assert!(!cell.contains(&[1.0, 0.0]));
        assert!(cell.contains(cell.interior_point()));
        assert_eq!(cell.query(), &[1.0, 0.0]);
    }

    #[test]
    fn dominated_query_has_empty_cell() {
        let model = ClusterModel::new(vec![vec![0.0, 0.0]])
            .unwrap()
            .with_weights(vec![4.0], 0.0)
            .unwrap();
        let bounds = BoundingBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(
            build_influence_cell(
                &[0.5, 0.0],
                &model,
                &DistanceMeasure::SquaredEuclidean,
                &bounds
            ),
            Err(Error::EmptyCell)
        );
    }

    #[test]
    fn containment() {
        let sq = unit_square();
        assert!(cell_contains(&sq, &[0.5, 0.5]));
        assert!(!cell_contains(&sq, &[1.5, 0.5]));
        assert!(cell_contains(&sq, &[1.0, 0.5]));
        assert!(cell_contains(&sq, &[1.0 + 5e-10, 0.5]));
    }

    #[test]
    fn chords() {
        let sq = unit_square();
        assert_eq!(
            chord_intersect(&sq, &[0.5, 0.5], &[1.0, 0.0]).unwrap(),
            (-0.5, 0.5)
        );
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let (lo, hi) = chord_intersect(&sq, &[0.5, 0.5], &[r, r]).unwrap();
        assert!((lo + r).abs() < 1e-8 && (hi - r).abs() < 1e-8);
        let half = InfluenceCell::from_halfspaces(
            vec![HalfSpace::new(vec![1.0, 0.0], 1.0).unwrap()],
            vec![0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(
            chord_intersect(&half, &[2.0, 0.0], &[1.0, 0.0]),
            Err(Error::OutsideCell { .. })
        ));
        assert_eq!(
            chord_intersect(&half, &[0.0, 0.0], &[0.0, 1.0]),
            Err(Error::UnboundedChord)
        );
    }

    #[test]
    fn owners() {
        let m = DistanceMeasure::SquaredEuclidean;
        let model =
            ClusterModel::new(vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![0.0, 10.0]]).unwrap();
        assert_eq!(steal_owner(&[1.0, 2.0], &model, &m), Ok(0));
        assert_eq!(steal_owner(&[5.0, 0.0], &model, &m), Ok(0));
        let weighted = ClusterModel::new(vec![vec![0.0, 0.0], vec![4.0, 0.0]])
            .unwrap()
            .with_weights(vec![0.0, 12.0], 0.0)
            .unwrap();
        assert_eq!(steal_owner(&[1.0, 0.0], &weighted, &m), Ok(1));
        let kl = DistanceMeasure::Bregman(Generator::GeneralizedKl);
        let pos = ClusterModel::new(vec![vec![1.0, 1.0], vec![3.0, 3.0]]).unwrap();
        assert_eq!(
            steal_owner(&[0.0, 1.0], &pos, &kl),
            Err(Error::OutsideDomain)
        );
    }
}
