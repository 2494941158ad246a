//! Brute-force insertability check: can a peg, dilated by a clearance, be
//! placed inside a hole under some yaw and small translation?
//!
//! A dilated peg fits a placement exactly when the undilated peg is contained
//! and its minimal boundary distance to the hole is at least the clearance, so
//! the sweep tracks that boundary slack (the "margin") per placement and
//! reports the best one. The margin itself is clearance-independent.

use serde::{Deserialize, Serialize};

use super::polygon::{
    point_in_polygon, point_segment_distance, rot_deg, segments_cross_properly, signed_area,
};
use super::{GeometryError, Polygon2D};

/// Search grids for the insertability sweep. Defaults decide desk-scale shapes
/// (features >= 5 mm, clearances >= 0.5 mm) correctly.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InsertabilityGrid {
    /// Yaw sweep step over [0, 360) degrees.
    pub yaw_step_deg: f64,
    /// Half-width of the translation window around centroid alignment.
    pub trans_window_mm: f64,
    /// Translation grid step.
    pub trans_step_mm: f64,
}

impl Default for InsertabilityGrid {
    fn default() -> Self {
        Self {
            yaw_step_deg: 1.0,
            trans_window_mm: 2.0,
            trans_step_mm: 0.25,
        }
    }
}

/// Slack tolerance when comparing a margin against the clearance, absorbing
/// float noise on exactly-toleranced pairs.
const FIT_TOL: f64 = 1e-9;

/// Violation magnitude assigned when containment fails only through edge
/// crossings (no vertex sticks out).
const CROSS_ONLY_VIOLATION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InsertabilityReport {
    pub fits: bool,
    /// Best boundary slack over the grid, negative when no placement contains
    /// the peg. Independent of the clearance.
    pub margin_mm: f64,
    /// Yaw achieving the best margin; smallest yaw wins ties.
    pub best_yaw_deg: f64,
}

struct HoleRef<'a> {
    verts: &'a [[f64; 2]],
    bbox_min: [f64; 2],
    bbox_max: [f64; 2],
    centroid: [f64; 2],
}

impl<'a> HoleRef<'a> {
    fn new(hole: &'a Polygon2D) -> Self {
        let (bbox_min, bbox_max) = hole.bounding_box();
        Self {
            verts: hole.vertices(),
            bbox_min,
            bbox_max,
            centroid: hole.area_centroid(),
        }
    }
}

/// Boundary slack of a placed peg inside the hole.
///
/// Positive values are the exact minimum distance between the two boundaries
/// (attained at a vertex of one polygon against an edge of the other).
/// Negative values estimate the worst vertex protrusion.
///
/// `prune_below` is a sweep optimization: once the margin is provably at or
/// below it, an upper bound of the true margin (itself <= `prune_below`) may
/// be returned instead of the exact value.
fn containment_margin(peg_verts: &[[f64; 2]], hole: &HoleRef, prune_below: f64) -> f64 {
    let n = peg_verts.len();
    let m = hole.verts.len();

    // Cheap lower bound on the worst protrusion from the hole's bbox alone.
    if prune_below > f64::NEG_INFINITY {
        let mut bbox_violation = 0.0f64;
        for &[x, y] in peg_verts {
            let dx = (hole.bbox_min[0] - x).max(x - hole.bbox_max[0]);
            let dy = (hole.bbox_min[1] - y).max(y - hole.bbox_max[1]);
            bbox_violation = bbox_violation.max(dx.max(dy));
        }
        if -bbox_violation <= prune_below {
            return -bbox_violation;
        }
    }

    let mut worst_outside = 0.0f64;
    let mut any_outside = false;
    for &v in peg_verts {
        if !point_in_polygon(v, hole.verts) {
            any_outside = true;
            let mut d = f64::INFINITY;
            for j in 0..m {
                d = d.min(point_segment_distance(
                    v,
                    hole.verts[j],
                    hole.verts[(j + 1) % m],
                ));
            }
            worst_outside = worst_outside.max(d);
            if -worst_outside <= prune_below {
                return -worst_outside;
            }
        }
    }
    if any_outside {
        return -worst_outside.max(CROSS_ONLY_VIOLATION);
    }

    for i in 0..n {
        let (a0, a1) = (peg_verts[i], peg_verts[(i + 1) % n]);
        for j in 0..m {
            if segments_cross_properly(a0, a1, hole.verts[j], hole.verts[(j + 1) % m]) {
                return -CROSS_ONLY_VIOLATION;
            }
        }
    }

    // Contained: exact minimum boundary distance.
    let mut min_d = f64::INFINITY;
    for &v in peg_verts {
        for j in 0..m {
            min_d = min_d.min(point_segment_distance(
                v,
                hole.verts[j],
                hole.verts[(j + 1) % m],
            ));
        }
    }
    for &v in hole.verts {
        for i in 0..n {
            min_d = min_d.min(point_segment_distance(
                v,
                peg_verts[i],
                peg_verts[(i + 1) % n],
            ));
        }
    }
    min_d
}

/// Places the peg at `yaw` (rotated about its own centroid) with its centroid
/// at `hole centroid + offset`, writing vertices into `scratch`.
fn place_peg(
    peg_verts: &[[f64; 2]],
    peg_centroid: [f64; 2],
    yaw_deg: f64,
    target: [f64; 2],
    offset: [f64; 2],
    scratch: &mut Vec<[f64; 2]>,
) {
    let (c, s) = rot_deg(yaw_deg);
    scratch.clear();
    for &[x, y] in peg_verts {
        let (dx, dy) = (x - peg_centroid[0], y - peg_centroid[1]);
        scratch.push([
            c * dx - s * dy + target[0] + offset[0],
            s * dx + c * dy + target[1] + offset[1],
        ]);
    }
}

fn bbox_of(verts: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for [x, y] in verts {
        min[0] = min[0].min(*x);
        min[1] = min[1].min(*y);
        max[0] = max[0].max(*x);
        max[1] = max[1].max(*y);
    }
    (min, max)
}

/// Boundary slack of the peg polygon inside the hole polygon exactly as
/// placed (no search): positive when contained, negative otherwise.
pub fn placed_margin(peg: &Polygon2D, hole: &Polygon2D) -> f64 {
    containment_margin(peg.vertices(), &HoleRef::new(hole), f64::NEG_INFINITY)
}

/// Maximum containment margin over the translation grid, holding the peg at a
/// fixed yaw relative to the hole. This is the orientation-locked query used
/// for yaw classification.
pub fn best_margin_at_yaw(
    peg: &Polygon2D,
    hole: &Polygon2D,
    yaw_deg: f64,
    grid: &InsertabilityGrid,
) -> f64 {
    let hole_ref = HoleRef::new(hole);
    let peg_centroid = peg.area_centroid();
    let offsets = offset_values(grid);
    let mut scratch = Vec::with_capacity(peg.vertices().len());
    margin_at_yaw(
        peg.vertices(),
        peg_centroid,
        yaw_deg,
        &hole_ref,
        &offsets,
        &mut scratch,
        f64::NEG_INFINITY,
    )
}

fn offset_values(grid: &InsertabilityGrid) -> Vec<f64> {
    let steps = (grid.trans_window_mm / grid.trans_step_mm).round() as i64;
    (-steps..=steps)
        .map(|i| i as f64 * grid.trans_step_mm)
        .collect()
}

fn margin_at_yaw(
    peg_verts: &[[f64; 2]],
    peg_centroid: [f64; 2],
    yaw_deg: f64,
    hole: &HoleRef,
    offsets: &[f64],
    scratch: &mut Vec<[f64; 2]>,
    prune_below: f64,
) -> f64 {
    // Centroid-aligned placement is always evaluated so infeasible yaws still
    // report a meaningful (negative) margin.
    place_peg(
        peg_verts,
        peg_centroid,
        yaw_deg,
        hole.centroid,
        [0.0, 0.0],
        scratch,
    );
    let center_margin = containment_margin(scratch, hole, f64::NEG_INFINITY);
    let mut best = center_margin;

    // Containment requires the rotated peg's bbox to fit inside the hole's
    // bbox; no translation can fix an oversize bbox. The bbox slack also
    // bounds any achievable margin at this yaw.
    let (pmin, pmax) = bbox_of(scratch);
    let dw = (hole.bbox_max[0] - hole.bbox_min[0]) - (pmax[0] - pmin[0]);
    let dh = (hole.bbox_max[1] - hole.bbox_min[1]) - (pmax[1] - pmin[1]);
    if dw < -FIT_TOL || dh < -FIT_TOL {
        return best;
    }
    let upper_bound = 0.5 * dw.min(dh).max(0.0);
    if upper_bound <= best.max(prune_below) {
        return best;
    }

    for &ox in offsets {
        for &oy in offsets {
            if ox == 0.0 && oy == 0.0 {
                continue;
            }
            // The margin is 1-Lipschitz in translation: offsets that cannot
            // beat the current best are skipped.
            if center_margin + (ox * ox + oy * oy).sqrt() <= best.max(prune_below) {
                continue;
            }
            // Cheap reject: the shifted bbox must stay inside the hole bbox.
            if pmin[0] + ox < hole.bbox_min[0] - FIT_TOL
                || pmax[0] + ox > hole.bbox_max[0] + FIT_TOL
                || pmin[1] + oy < hole.bbox_min[1] - FIT_TOL
                || pmax[1] + oy > hole.bbox_max[1] + FIT_TOL
            {
                continue;
            }
            place_peg(
                peg_verts,
                peg_centroid,
                yaw_deg,
                hole.centroid,
                [ox, oy],
                scratch,
            );
            let m = containment_margin(scratch, hole, best.max(prune_below));
            if m > best {
                best = m;
            }
        }
    }
    best
}

/// Grid-sweep insertability with the default grids.
pub fn insertability(
    peg: &Polygon2D,
    hole: &Polygon2D,
    clearance_mm: f64,
) -> Result<InsertabilityReport, GeometryError> {
    insertability_with_grid(peg, hole, clearance_mm, &InsertabilityGrid::default())
}

/// Grid-sweep insertability: `fits` is true iff some placement on the grid
/// leaves at least `clearance_mm` of boundary slack everywhere.
pub fn insertability_with_grid(
    peg: &Polygon2D,
    hole: &Polygon2D,
    clearance_mm: f64,
    grid: &InsertabilityGrid,
) -> Result<InsertabilityReport, GeometryError> {
    if !(clearance_mm >= 0.0) {
        return Err(GeometryError::InvalidPolygon(format!(
            "clearance must be non-negative, got {clearance_mm}"
        )));
    }
    if !(grid.yaw_step_deg > 0.0) || !(grid.trans_step_mm > 0.0) || grid.trans_window_mm < 0.0 {
        return Err(GeometryError::InvalidPolygon(format!(
            "invalid sweep grid: {grid:?}"
        )));
    }
    if signed_area(peg.vertices()) <= 0.0 || signed_area(hole.vertices()) <= 0.0 {
        return Err(GeometryError::InvalidPolygon(
            "polygons must have positive area".into(),
        ));
    }

    let hole_ref = HoleRef::new(hole);
    let peg_centroid = peg.area_centroid();
    let offsets = offset_values(grid);
    let mut scratch = Vec::with_capacity(peg.vertices().len());

    let mut best_margin = f64::NEG_INFINITY;
    let mut best_yaw = 0.0;
    let mut yaw = 0.0;
    while yaw < 360.0 - 1e-9 {
        let m = margin_at_yaw(
            peg.vertices(),
            peg_centroid,
            yaw,
            &hole_ref,
            &offsets,
            &mut scratch,
            best_margin,
        );
        // Strict improvement only: the smallest yaw wins exact ties.
        if m > best_margin {
            best_margin = m;
            best_yaw = yaw;
        }
        yaw += grid.yaw_step_deg;
    }

    Ok(InsertabilityReport {
        fits: best_margin >= clearance_mm - FIT_TOL,
        margin_mm: best_margin,
        best_yaw_deg: best_yaw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: f64, h: f64) -> Polygon2D {
        Polygon2D::new(vec![
            [-w / 2.0, -h / 2.0],
            [w / 2.0, -h / 2.0],
            [w / 2.0, h / 2.0],
            [-w / 2.0, h / 2.0],
        ])
        .unwrap()
    }

    #[test]
    fn identical_shapes_fit_with_zero_margin() {
        let p = rect(10.0, 20.0);
        let r = insertability(&p, &p, 0.0).unwrap();
        assert!(r.fits);
        assert!(r.margin_mm.abs() <= 1e-9, "margin {}", r.margin_mm);
        assert_eq!(r.best_yaw_deg, 0.0);
    }

    #[test]
    fn oversize_peg_never_fits() {
        let r = insertability(&rect(10.0, 10.0), &rect(8.0, 8.0), 0.0).unwrap();
        assert!(!r.fits);
        assert!(r.margin_mm < 0.0);
    }

    #[test]
    fn rotated_hole_requires_ninety_degree_yaw() {
        // Hole is a 10.6 x 20.6 rectangle rotated 90 degrees in the plane; the
        // 10 x 20 peg only fits after the same rotation.
        let peg = rect(10.0, 20.0);
        let hole = rect(10.6, 20.6).rotated(90.0);
        let r = insertability(&peg, &hole, 0.0).unwrap();
        assert!(r.fits);
        assert_eq!(r.best_yaw_deg, 90.0);
        assert!((r.margin_mm - 0.3).abs() < 1e-9, "margin {}", r.margin_mm);
    }

    #[test]
    fn margin_is_independent_of_clearance_and_fits_thresholds_on_it() {
        let peg = rect(10.0, 20.0);
        let hole = rect(11.0, 21.0);
        let r0 = insertability(&peg, &hole, 0.0).unwrap();
        let r4 = insertability(&peg, &hole, 0.4).unwrap();
        let r6 = insertability(&peg, &hole, 0.6).unwrap();
        assert_eq!(r0.margin_mm, r4.margin_mm);
        assert_eq!(r0.margin_mm, r6.margin_mm);
        assert!((r0.margin_mm - 0.5).abs() < 1e-9);
        assert!(r0.fits && r4.fits && !r6.fits);
    }

    #[test]
    fn fitting_at_larger_clearance_implies_fitting_at_smaller() {
        // Demanding more slack can only lose placements.
        let cases = [
            (rect(10.0, 20.0), rect(10.6, 20.6)),
            (rect(10.0, 20.0), rect(12.0, 22.0)),
            (rect(10.0, 10.0), rect(9.0, 9.0)),
        ];
        for (peg, hole) in &cases {
            let mut prev_fits = true;
            for c in [0.0, 0.2, 0.4, 0.8, 1.5] {
                let fits = insertability(peg, hole, c).unwrap().fits;
                assert!(
                    !fits || prev_fits,
                    "fits flipped false->true as clearance grew"
                );
                prev_fits = fits;
            }
        }
    }

    #[test]
    fn invariant_under_simultaneous_rigid_motion() {
        let peg = rect(10.0, 20.0);
        let hole = rect(10.6, 20.6);
        let base = insertability(&peg, &hole, 0.2).unwrap();

        let peg_m = peg.rotated(33.0).translated(40.0, -17.0);
        let hole_m = hole.rotated(33.0).translated(40.0, -17.0);
        let moved = insertability(&peg_m, &hole_m, 0.2).unwrap();

        assert_eq!(base.fits, moved.fits);
        assert!((base.margin_mm - moved.margin_mm).abs() < 1e-6);
        // Both shapes moved together, so the relative yaw is unchanged (up to
        // the rectangle's 180-degree symmetry).
        let dy = (moved.best_yaw_deg - base.best_yaw_deg).rem_euclid(180.0);
        assert!(dy.min(180.0 - dy) <= 1.0, "best yaw moved: {dy}");
    }

    #[test]
    fn locked_yaw_margin_matches_full_sweep_at_that_yaw() {
        let peg = rect(10.0, 20.0);
        let hole = rect(10.6, 20.6).rotated(90.0);
        let grid = InsertabilityGrid::default();
        let at_90 = best_margin_at_yaw(&peg, &hole, 90.0, &grid);
        assert!((at_90 - 0.3).abs() < 1e-9);
        let at_0 = best_margin_at_yaw(&peg, &hole, 0.0, &grid);
        assert!(at_0 < 0.0);
    }

    #[test]
    fn symmetric_rectangle_margins_tie_exactly_at_180() {
        let peg = rect(10.0, 20.0);
        let hole = rect(10.6, 20.6);
        let grid = InsertabilityGrid::default();
        let m0 = best_margin_at_yaw(&peg, &hole, 0.0, &grid);
        let m180 = best_margin_at_yaw(&peg, &hole, 180.0, &grid);
        assert_eq!(m0, m180, "exact-trig rotations must preserve ties");
    }

    #[test]
    fn rejects_negative_clearance() {
        let p = rect(4.0, 4.0);
        assert!(insertability(&p, &p, -0.1).is_err());
    }
}
