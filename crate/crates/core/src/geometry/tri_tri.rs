//! Triangle/triangle intersection via the segment-of-intersection test.
//!
//! Each triangle is cut by the other's supporting plane; for non-coplanar
//! pairs both cuts lie on the planes' common line and the triangles meet iff
//! the two cut intervals overlap. Coplanar pairs fall back to a 2D
//! edge-crossing / containment test. Distances within [`TRI_EPS`] of a plane
//! snap onto it, so touching pairs (including coplanar touching) intersect.

use nalgebra::{Point2, Point3, Vector3};

pub type Triangle = [Point3<f64>; 3];

/// Plane-distance and overlap tolerance in meters.
pub const TRI_EPS: f64 = 1e-9;

pub fn is_degenerate(t: &Triangle) -> bool {
    let e0 = t[1] - t[0];
    let e1 = t[2] - t[0];
    let e2 = t[2] - t[1];
    let scale = e0.norm_squared().max(e1.norm_squared()).max(e2.norm_squared());
    scale == 0.0 || e0.cross(&e1).norm() <= 1e-12 * scale
}

fn unit_normal(t: &Triangle) -> Vector3<f64> {
    (t[1] - t[0]).cross(&(t[2] - t[0])).normalize()
}

fn plane_distances(t: &Triangle, n: &Vector3<f64>, origin: &Point3<f64>) -> [f64; 3] {
    t.map(|p| {
        let d = n.dot(&(p - origin));
        if d.abs() <= TRI_EPS {
            0.0
        } else {
            d
        }
    })
}

fn same_side(d: &[f64; 3]) -> bool {
    (d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0) || (d[0] < 0.0 && d[1] < 0.0 && d[2] < 0.0)
}

/// Interval of `t ∩ plane` projected on `dir`.
fn cut_interval(t: &Triangle, d: &[f64; 3], dir: &Vector3<f64>) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut push = |p: Point3<f64>| {
        let s = dir.dot(&p.coords);
        lo = lo.min(s);
        hi = hi.max(s);
    };
    for i in 0..3 {
        let j = (i + 1) % 3;
        if d[i] == 0.0 {
            push(t[i]);
        }
        if d[i] * d[j] < 0.0 {
            let s = d[i] / (d[i] - d[j]);
            push(t[i] + (t[j] - t[i]) * s);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Closed intersection test; degenerate triangles never intersect.
pub fn tri_tri_intersect(a: &Triangle, b: &Triangle) -> bool {
    if is_degenerate(a) || is_degenerate(b) {
        return false;
    }
    let nb = unit_normal(b);
    let da = plane_distances(a, &nb, &b[0]);
    if same_side(&da) {
        return false;
    }
    let na = unit_normal(a);
    let db = plane_distances(b, &na, &a[0]);
    if same_side(&db) {
        return false;
    }
    let coplanar = da.iter().all(|&d| d == 0.0) || db.iter().all(|&d| d == 0.0);
    let line = na.cross(&nb);
    if coplanar || line.norm() < 1e-12 {
        return coplanar_intersect(a, b, &na);
    }
    let dir = line.normalize();
    match (cut_interval(a, &da, &dir), cut_interval(b, &db, &dir)) {
        (Some((a0, a1)), Some((b0, b1))) => a0 <= b1 + TRI_EPS && b0 <= a1 + TRI_EPS,
        _ => false,
    }
}

fn project(t: &Triangle, n: &Vector3<f64>) -> [Point2<f64>; 3] {
    let axis = n.iamax();
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    };
    t.map(|p| Point2::new(p[u], p[v]))
}

fn orient(a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Orientation snapped to zero when `c` lies within `TRI_EPS` of line `ab`.
fn orient_snapped(a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>) -> f64 {
    let o = orient(a, b, c);
    if o.abs() <= TRI_EPS * (b - a).norm() {
        0.0
    } else {
        o
    }
}

fn on_segment(a: &Point2<f64>, b: &Point2<f64>, p: &Point2<f64>) -> bool {
    p.x >= a.x.min(b.x) - TRI_EPS
        && p.x <= a.x.max(b.x) + TRI_EPS
        && p.y >= a.y.min(b.y) - TRI_EPS
        && p.y <= a.y.max(b.y) + TRI_EPS
}

fn segments_intersect(p1: &Point2<f64>, p2: &Point2<f64>, q1: &Point2<f64>, q2: &Point2<f64>) -> bool {
    let d1 = orient_snapped(q1, q2, p1);
    let d2 = orient_snapped(q1, q2, p2);
    let d3 = orient_snapped(p1, p2, q1);
    let d4 = orient_snapped(p1, p2, q2);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn point_in_triangle(t: &[Point2<f64>; 3], p: &Point2<f64>) -> bool {
    let s = [
        orient_snapped(&t[0], &t[1], p),
        orient_snapped(&t[1], &t[2], p),
        orient_snapped(&t[2], &t[0], p),
    ];
    s.iter().all(|&x| x >= 0.0) || s.iter().all(|&x| x <= 0.0)
}

fn coplanar_intersect(a: &Triangle, b: &Triangle, n: &Vector3<f64>) -> bool {
    let pa = project(a, n);
    let pb = project(b, n);
    for i in 0..3 {
        for j in 0..3 {
            if segments_intersect(&pa[i], &pa[(i + 1) % 3], &pb[j], &pb[(j + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_triangle(&pb, &pa[0]) || point_in_triangle(&pa, &pb[0])
}
