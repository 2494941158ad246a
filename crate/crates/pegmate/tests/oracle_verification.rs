//! Independent verification of the insertability sweep on its worked
//! example, using a finer grid (0.1 degrees, 0.05 mm) and a separately
//! written containment check (winding-number point test over a densely
//! sampled peg boundary) that shares no code with the implementation.

use pegmate::geometry::{insertability, Polygon2D};

fn rect(w: f64, h: f64) -> Polygon2D {
    Polygon2D::new(vec![
        [-w / 2.0, -h / 2.0],
        [w / 2.0, -h / 2.0],
        [w / 2.0, h / 2.0],
        [-w / 2.0, h / 2.0],
    ])
    .unwrap()
}

/// Winding-number containment: nonzero winding means inside.
fn winding_inside(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut angle = 0.0f64;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let v1 = (a[0] - p[0], a[1] - p[1]);
        let v2 = (b[0] - p[0], b[1] - p[1]);
        let cross = v1.0 * v2.1 - v1.1 * v2.0;
        let dot = v1.0 * v2.0 + v1.1 * v2.1;
        angle += cross.atan2(dot);
    }
    angle.abs() > std::f64::consts::PI
}

/// Distance from a point to the polygon boundary, written from scratch.
fn boundary_distance(p: [f64; 2], poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len2 = ex * ex + ey * ey;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len2).clamp(0.0, 1.0)
        };
        let (cx, cy) = (a[0] + t * ex, a[1] + t * ey);
        best = best.min(((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt());
    }
    best
}

/// Boundary samples of the peg at roughly 0.05 mm spacing.
fn boundary_samples(poly: &Polygon2D, step_mm: f64) -> Vec<[f64; 2]> {
    let verts = poly.vertices();
    let n = verts.len();
    let mut out = Vec::new();
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let steps = (len / step_mm).ceil().max(1.0) as usize;
        for k in 0..steps {
            let t = k as f64 / steps as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

fn centroid(poly: &Polygon2D) -> [f64; 2] {
    poly.area_centroid()
}

/// Fine-grid fit check at one placement: every peg boundary sample must be
/// inside the hole with at least `clearance` of boundary distance.
fn placement_fits(
    peg_samples: &[[f64; 2]],
    dx: f64,
    dy: f64,
    hole: &[[f64; 2]],
    clearance: f64,
) -> bool {
    for s in peg_samples {
        let p = [s[0] + dx, s[1] + dy];
        if !winding_inside(p, hole) {
            return false;
        }
        if boundary_distance(p, hole) < clearance {
            return false;
        }
    }
    true
}

fn rotated_samples(poly: &Polygon2D, yaw_deg: f64, step_mm: f64) -> Vec<[f64; 2]> {
    let c = centroid(poly);
    let rad = yaw_deg.to_radians();
    let (cs, sn) = (rad.cos(), rad.sin());
    boundary_samples(poly, step_mm)
        .into_iter()
        .map(|[x, y]| {
            let (dx, dy) = (x - c[0], y - c[1]);
            [c[0] + cs * dx - sn * dy, c[1] + sn * dx + cs * dy]
        })
        .collect()
}

#[test]
fn fine_grid_confirms_the_rotated_rectangle_fit() {
    let peg = rect(10.0, 20.0);
    let hole = rect(10.6, 20.6).rotated(90.0);

    let report = insertability(&peg, &hole, 0.0).unwrap();
    assert!(report.fits);
    assert_eq!(report.best_yaw_deg, 90.0);

    // Independent search on a 0.1-degree / 0.05 mm grid near the reported
    // best yaw: some placement must fit.
    let hole_verts = hole.vertices().to_vec();
    let hc = centroid(&hole);
    let pc = centroid(&peg);
    let mut found = false;
    let mut yaw = 85.0;
    'search: while yaw <= 95.0 {
        let samples: Vec<[f64; 2]> = rotated_samples(&peg, yaw, 0.05);
        let mut ox = -2.0;
        while ox <= 2.0 {
            let mut oy = -2.0;
            while oy <= 2.0 {
                let (dx, dy) = (hc[0] - pc[0] + ox, hc[1] - pc[1] + oy);
                if placement_fits(&samples, dx, dy, &hole_verts, 0.0) {
                    found = true;
                    break 'search;
                }
                oy += 0.05;
            }
            ox += 0.05;
        }
        yaw += 0.1;
    }
    assert!(found, "fine grid must confirm the fit near 90 degrees");
}

#[test]
fn fine_grid_confirms_the_oversize_rejection() {
    let peg = rect(10.0, 10.0);
    let hole = rect(8.0, 8.0);
    let report = insertability(&peg, &hole, 0.0).unwrap();
    assert!(!report.fits);

    // Full fine sweep: no placement may fit. Each placement dies on its
    // first out-of-hole sample, so this stays fast.
    let hole_verts = hole.vertices().to_vec();
    let hc = centroid(&hole);
    let pc = centroid(&peg);
    let mut yaw = 0.0;
    while yaw < 360.0 {
        let samples = rotated_samples(&peg, yaw, 0.05);
        let mut ox = -2.0;
        while ox <= 2.0 {
            let mut oy = -2.0;
            while oy <= 2.0 {
                let (dx, dy) = (hc[0] - pc[0] + ox, hc[1] - pc[1] + oy);
                assert!(
                    !placement_fits(&samples, dx, dy, &hole_verts, 0.0),
                    "unexpected fit at yaw {yaw}, offset ({ox}, {oy})"
                );
                oy += 0.05;
            }
            ox += 0.05;
        }
        yaw += 0.1;
    }
}

#[test]
fn fine_grid_margin_agrees_at_the_best_placement() {
    // At the aligned placement the implementation's margin should agree with
    // an independently computed minimum boundary distance.
    let peg = rect(10.0, 20.0);
    let hole = rect(10.6, 20.6);
    let report = insertability(&peg, &hole, 0.0).unwrap();
    let samples = boundary_samples(&peg, 0.02);
    let min_d = samples
        .iter()
        .map(|s| boundary_distance(*s, hole.vertices()))
        .fold(f64::INFINITY, f64::min);
    assert!(
        (report.margin_mm - min_d).abs() < 0.01,
        "impl {} vs sampled {min_d}",
        report.margin_mm
    );
}
