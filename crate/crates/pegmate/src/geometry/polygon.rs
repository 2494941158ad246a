//! Simple-polygon primitives: construction and validation, convex hulls, and
//! minimum-area bounding rectangles via rotating calipers.

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Absolute tolerance for collinearity / on-boundary tests, in the polygon's
/// own unit (millimeters for board geometry, pixels for image work).
const GEOM_EPS: f64 = 1e-9;

/// `(cos, sin)` of an angle in degrees, exact at multiples of 90.
///
/// Grid sweeps over whole degrees rely on exact values at quadrant angles so
/// that rotations of symmetric shapes produce bit-identical vertex sets and
/// ties stay ties.
pub fn rot_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (1.0, 0.0)
    } else if r == 90.0 {
        (0.0, 1.0)
    } else if r == 180.0 {
        (-1.0, 0.0)
    } else if r == 270.0 {
        (0.0, -1.0)
    } else {
        let rad = deg.to_radians();
        (rad.cos(), rad.sin())
    }
}

/// Simple (non-self-intersecting) polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Polygon2D {
    vertices: Vec<[f64; 2]>,
}

impl TryFrom<Vec<[f64; 2]>> for Polygon2D {
    type Error = GeometryError;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<Polygon2D> for Vec<[f64; 2]> {
    fn from(p: Polygon2D) -> Self {
        p.vertices
    }
}

impl Polygon2D {
    /// Validates vertex count, non-zero area, and simplicity. Clockwise input
    /// is reversed so the stored orientation is always counter-clockwise.
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        let area = signed_area(&vertices);
        if area.abs() < GEOM_EPS {
            return Err(GeometryError::InvalidPolygon("zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        if self_intersects(&vertices) {
            return Err(GeometryError::InvalidPolygon("self-intersecting".into()));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Centroid of the enclosed area (not the vertex mean).
    pub fn area_centroid(&self) -> [f64; 2] {
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut a = 0.0;
        let n = self.vertices.len();
        for i in 0..n {
            let [x0, y0] = self.vertices[i];
            let [x1, y1] = self.vertices[(i + 1) % n];
            let w = x0 * y1 - x1 * y0;
            a += w;
            cx += (x0 + x1) * w;
            cy += (y0 + y1) * w;
        }
        a *= 0.5;
        [cx / (6.0 * a), cy / (6.0 * a)]
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|[x, y]| [x + dx, y + dy])
                .collect(),
        }
    }

    /// Rotates counter-clockwise about `center` (exact at 90-degree multiples).
    pub fn rotated_about(&self, deg: f64, center: [f64; 2]) -> Self {
        let (c, s) = rot_deg(deg);
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|[x, y]| {
                    let (dx, dy) = (x - center[0], y - center[1]);
                    [center[0] + c * dx - s * dy, center[1] + s * dx + c * dy]
                })
                .collect(),
        }
    }

    /// Rotates counter-clockwise about the area centroid.
    pub fn rotated(&self, deg: f64) -> Self {
        self.rotated_about(deg, self.area_centroid())
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for [x, y] in &self.vertices {
            min[0] = min[0].min(*x);
            min[1] = min[1].min(*y);
            max[0] = max[0].max(*x);
            max[1] = max[1].max(*y);
        }
        (min, max)
    }

    /// Boundary-inclusive point containment (even-odd rule).
    pub fn contains_point(&self, p: [f64; 2]) -> bool {
        point_in_polygon(p, &self.vertices)
    }
}

pub(crate) fn signed_area(vertices: &[[f64; 2]]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let [x0, y0] = vertices[i];
        let [x1, y1] = vertices[(i + 1) % n];
        acc += x0 * y1 - x1 * y0;
    }
    acc * 0.5
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    if cross(a, b, p).abs() > GEOM_EPS * (1.0 + dist(a, b)) {
        return false;
    }
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (p[0] - a[0]) * dx + (p[1] - a[1]) * dy;
    t >= -GEOM_EPS && t <= dx * dx + dy * dy + GEOM_EPS
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Even-odd containment, counting boundary points as inside.
pub(crate) fn point_in_polygon(p: [f64; 2], vertices: &[[f64; 2]]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        if on_segment(p, vertices[i], vertices[(i + 1) % n]) {
            return true;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let [x0, y0] = vertices[i];
        let [x1, y1] = vertices[(i + 1) % n];
        if (y0 > p[1]) != (y1 > p[1]) {
            let xi = x0 + (p[1] - y0) / (y1 - y0) * (x1 - x0);
            if p[0] < xi {
                inside = !inside;
            }
        }
    }
    inside
}

/// Proper (transversal) segment crossing; shared endpoints and collinear
/// overlaps do not count.
pub(crate) fn segments_cross_properly(
    a0: [f64; 2],
    a1: [f64; 2],
    b0: [f64; 2],
    b1: [f64; 2],
) -> bool {
    let d1 = cross(a0, a1, b0);
    let d2 = cross(a0, a1, b1);
    let d3 = cross(b0, b1, a0);
    let d4 = cross(b0, b1, a1);
    let eps = GEOM_EPS * (1.0 + dist(a0, a1).max(dist(b0, b1)));
    ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
}

fn self_intersects(vertices: &[[f64; 2]]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let (a0, a1) = (vertices[i], vertices[(i + 1) % n]);
        for j in (i + 1)..n {
            // Skip adjacent edges (they share a vertex).
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (b0, b1) = (vertices[j], vertices[(j + 1) % n]);
            if segments_cross_properly(a0, a1, b0, b1) {
                return true;
            }
        }
    }
    false
}

/// Minimum distance from a point to a segment.
pub(crate) fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * dx, a[1] + t * dy])
}

/// Convex hull of a point set (Andrew's monotone chain), counter-clockwise.
///
/// Fails with `Degenerate` when fewer than 3 distinct points remain or all
/// points are collinear.
pub fn convex_hull(points: &[[f64; 2]]) -> Result<Polygon2D, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::Degenerate(format!(
            "{} points",
            points.len()
        )));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();

    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() < 3 {
        return Err(GeometryError::Degenerate("all points collinear".into()));
    }
    Ok(Polygon2D { vertices: hull })
}

/// Oriented rectangle: `half_extents.0 >= half_extents.1` and the reported
/// angle is the long-edge direction reduced modulo 90 into [0, 90).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedRect {
    pub center: [f64; 2],
    pub half_extents: (f64, f64),
    pub angle_deg: f64,
}

/// Minimum-area bounding rectangle of a point set or polygon.
///
/// One rectangle edge is collinear with a convex-hull edge (rotating-calipers
/// property). Area ties between candidate rectangles resolve to the smaller
/// reported angle, which also pins the square case.
pub fn min_area_rect(polygon: &Polygon2D) -> Result<OrientedRect, GeometryError> {
    let hull = convex_hull(&polygon.vertices)?;
    let verts = &hull.vertices;
    let n = verts.len();

    let mut best: Option<(f64, OrientedRect)> = None;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len = (ex * ex + ey * ey).sqrt();
        if len < GEOM_EPS {
            continue;
        }
        let (ux, uy) = (ex / len, ey / len); // edge direction
        let (vx, vy) = (-uy, ux); // perpendicular

        let mut umin = f64::INFINITY;
        let mut umax = f64::NEG_INFINITY;
        let mut vmin = f64::INFINITY;
        let mut vmax = f64::NEG_INFINITY;
        for [x, y] in verts {
            let pu = x * ux + y * uy;
            let pv = x * vx + y * vy;
            umin = umin.min(pu);
            umax = umax.max(pu);
            vmin = vmin.min(pv);
            vmax = vmax.max(pv);
        }
        let (du, dv) = (umax - umin, vmax - vmin);
        let area = du * dv;

        let edge_angle = uy.atan2(ux).to_degrees();
        // Long-edge direction, reduced mod 90 into [0, 90).
        let long_angle = if du >= dv {
            edge_angle
        } else {
            edge_angle + 90.0
        };
        let mut angle = long_angle.rem_euclid(90.0);
        if 90.0 - angle < 1e-9 {
            angle = 0.0;
        }

        let cu = 0.5 * (umin + umax);
        let cv = 0.5 * (vmin + vmax);
        let rect = OrientedRect {
            center: [cu * ux + cv * vx, cu * uy + cv * vy],
            half_extents: (du.max(dv) / 2.0, du.min(dv) / 2.0),
            angle_deg: angle,
        };

        let tol = 1e-9 * area.max(1.0);
        best = match best {
            None => Some((area, rect)),
            Some((ba, br)) => {
                if area < ba - tol || (area <= ba + tol && angle < br.angle_deg) {
                    Some((area, rect))
                } else {
                    Some((ba, br))
                }
            }
        };
    }
    match best {
        Some((area, rect)) if area > GEOM_EPS => Ok(rect),
        _ => Err(GeometryError::Degenerate("zero-area hull".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rect_points(w: f64, h: f64) -> Vec<[f64; 2]> {
        vec![
            [-w / 2.0, -h / 2.0],
            [w / 2.0, -h / 2.0],
            [w / 2.0, h / 2.0],
            [-w / 2.0, h / 2.0],
        ]
    }

    #[test]
    fn polygon_new_reorients_clockwise_input() {
        let mut cw = rect_points(4.0, 2.0);
        cw.reverse();
        let p = Polygon2D::new(cw).unwrap();
        assert!(p.signed_area() > 0.0);
    }

    #[test]
    fn polygon_new_rejects_degenerate_input() {
        assert!(Polygon2D::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(Polygon2D::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
        // Bowtie self-intersection.
        assert!(Polygon2D::new(vec![[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]]).is_err());
    }

    #[test]
    fn hull_of_square_plus_interior_point() {
        let mut pts = rect_points(2.0, 2.0);
        pts.push([0.1, 0.2]);
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 4);
        for v in hull.vertices() {
            assert!(rect_points(2.0, 2.0).contains(v));
        }
    }

    #[test]
    fn hull_of_triangle_is_itself() {
        let pts = vec![[0.0, 0.0], [3.0, 0.0], [1.0, 2.0]];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 3);
    }

    #[test]
    fn hull_rejects_collinear() {
        let pts = vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        assert!(matches!(
            convex_hull(&pts),
            Err(GeometryError::Degenerate(_))
        ));
    }

    #[test]
    fn hull_contains_all_random_points() {
        let mut rng = StdRng::seed_from_u64(11);
        let pts: Vec<[f64; 2]> = (0..200)
            .map(|_| [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)])
            .collect();
        let hull = convex_hull(&pts).unwrap();
        for p in &pts {
            assert!(hull.contains_point(*p), "point {p:?} escaped its hull");
        }
    }

    #[test]
    fn min_rect_axis_aligned() {
        let p = Polygon2D::new(rect_points(40.0, 20.0)).unwrap();
        let r = min_area_rect(&p).unwrap();
        assert!(r.angle_deg.abs() < 1e-9);
        assert!((r.half_extents.0 - 20.0).abs() < 1e-9);
        assert!((r.half_extents.1 - 10.0).abs() < 1e-9);
        assert!(r.center[0].abs() < 1e-9 && r.center[1].abs() < 1e-9);
    }

    #[test]
    fn min_rect_rotation_equivariance() {
        let p = Polygon2D::new(rect_points(40.0, 20.0)).unwrap();
        let r25 = min_area_rect(&p.rotated(25.0)).unwrap();
        assert!((r25.angle_deg - 25.0).abs() < 1e-6, "{}", r25.angle_deg);
        // 115 degrees reduces mod 90 to 25.
        let r115 = min_area_rect(&p.rotated(115.0)).unwrap();
        assert!((r115.angle_deg - 25.0).abs() < 1e-6, "{}", r115.angle_deg);
    }

    #[test]
    fn min_rect_brute_force_angle_sweep_agrees() {
        // Independent oracle: sweep candidate angles at 0.01 degrees and keep
        // the smallest axis-aligned area in the rotated frame.
        let p = Polygon2D::new(rect_points(40.0, 20.0))
            .unwrap()
            .rotated(115.0);
        let mut best = (f64::INFINITY, 0.0);
        let mut a = 0.0;
        while a < 90.0 {
            let rad = (a as f64).to_radians();
            let (c, s) = (rad.cos(), rad.sin());
            let mut min = [f64::INFINITY; 2];
            let mut max = [f64::NEG_INFINITY; 2];
            for [x, y] in p.vertices() {
                let u = c * x + s * y;
                let v = -s * x + c * y;
                min[0] = min[0].min(u);
                min[1] = min[1].min(v);
                max[0] = max[0].max(u);
                max[1] = max[1].max(v);
            }
            let du = max[0] - min[0];
            let dv = max[1] - min[1];
            let area = du * dv;
            if area < best.0 {
                // Report the long-edge direction like the implementation does.
                let angle = if du >= dv { a } else { (a + 90.0) % 90.0 };
                best = (area, angle);
            }
            a += 0.01;
        }
        let r = min_area_rect(&p).unwrap();
        let diff = (r.angle_deg - best.1).abs();
        assert!(
            diff.min(90.0 - diff) < 0.05,
            "impl {} sweep {}",
            r.angle_deg,
            best.1
        );
    }

    #[test]
    fn min_rect_square_tie_resolves_to_smaller_angle() {
        let p = Polygon2D::new(rect_points(10.0, 10.0)).unwrap();
        let r = min_area_rect(&p).unwrap();
        assert!(r.angle_deg.abs() < 1e-9);
    }

    #[test]
    fn area_centroid_of_translated_rect() {
        let p = Polygon2D::new(rect_points(4.0, 2.0))
            .unwrap()
            .translated(3.0, -1.0);
        let c = p.area_centroid();
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn containment_counts_boundary_as_inside() {
        let p = Polygon2D::new(rect_points(2.0, 2.0)).unwrap();
        assert!(p.contains_point([1.0, 0.0]));
        assert!(p.contains_point([1.0, 1.0]));
        assert!(p.contains_point([0.0, 0.0]));
        assert!(!p.contains_point([1.0 + 1e-6, 0.0]));
    }

    #[test]
    fn rot_deg_is_exact_at_quadrants() {
        assert_eq!(rot_deg(0.0), (1.0, 0.0));
        assert_eq!(rot_deg(90.0), (0.0, 1.0));
        assert_eq!(rot_deg(180.0), (-1.0, 0.0));
        assert_eq!(rot_deg(270.0), (0.0, -1.0));
        assert_eq!(rot_deg(450.0), (0.0, 1.0));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// rect(rotate(P, a)).angle == (rect(P).angle + a) mod 90 for
            /// non-square hulls.
            #[test]
            fn min_rect_rotation_equivariance(
                alpha in 0.0f64..360.0,
                w in 12.0f64..50.0,
                aspect in 1.2f64..4.0,
            ) {
                let p = Polygon2D::new(rect_points(w, w / aspect)).unwrap();
                let base = min_area_rect(&p).unwrap().angle_deg;
                let rotated = min_area_rect(&p.rotated(alpha)).unwrap().angle_deg;
                let expect = (base + alpha).rem_euclid(90.0);
                let diff = (rotated - expect).abs();
                prop_assert!(
                    diff.min(90.0 - diff) < 1e-6,
                    "alpha {alpha}: got {rotated}, expected {expect}"
                );
            }
        }
    }
}
