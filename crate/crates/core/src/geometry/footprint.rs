//! Environment footprint: circumscribed rectangle plus an enclosing polygon.
//!
//! The polygon starts as the convex hull of the vertices in a horizontal slab
//! and is refined rectilinearly: wherever two consecutive hull corners are not
//! right angles, the edge between them is replaced by a notch running along
//! the neighbouring edges, provided a slab vertex sits at the notch corner and
//! no slab vertex would be cut off. Corners that cannot be resolved this way
//! are reported in `non_rectilinear_corners`. Small alcoves are not captured.

use log::warn;
use nalgebra::{Point2, Vector2};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::{GeometryError, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect2 {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect2 {
    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn contains(&self, p: &Point2<f64>) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FootprintParams {
    /// Height of the slab centre (m).
    pub slice_height: f64,
    /// Slab half-width (m).
    pub slab_half_width: f64,
    /// Corners within this many degrees of 90° count as right angles.
    pub right_angle_tolerance_deg: f64,
    /// Max distance between a notch corner and its supporting vertex (m).
    pub notch_support_tolerance: f64,
}

impl Default for FootprintParams {
    fn default() -> Self {
        Self {
            slice_height: 0.0,
            slab_half_width: 0.1,
            right_angle_tolerance_deg: 2.0,
            notch_support_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintPolygon {
    /// Counter-clockwise outline.
    pub polygon: Vec<Point2<f64>>,
    pub circumscribed_rect: Rect2,
    /// Lowest environment z; assets are placed on this floor.
    pub floor_z: f64,
    /// Highest environment z.
    pub ceiling_z: f64,
    /// Polygon indices of corners left non-rectilinear.
    pub non_rectilinear_corners: Vec<usize>,
    /// True when the slab was empty and the full-mesh hull was used.
    pub fallback: bool,
}

const CONTAIN_TOL: f64 = 1e-6;

impl FootprintPolygon {
    pub fn area(&self) -> f64 {
        let n = self.polygon.len();
        (0..n)
            .map(|i| {
                let a = self.polygon[i];
                let b = self.polygon[(i + 1) % n];
                a.x * b.y - b.x * a.y
            })
            .sum::<f64>()
            * 0.5
    }

    pub fn is_degenerate(&self) -> bool {
        self.polygon.len() < 3 || self.area() <= 1e-12
    }

    /// Closed containment with a 1 µm boundary tolerance.
    pub fn contains(&self, p: &Point2<f64>) -> bool {
        contains_point(&self.polygon, p, CONTAIN_TOL)
    }

    /// Uniform sample inside the polygon by rejection from the rectangle.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Point2<f64>, GeometryError> {
        if self.is_degenerate() {
            return Err(GeometryError::EmptyFootprint);
        }
        let r = &self.circumscribed_rect;
        loop {
            let p = Point2::new(
                r.min_x + rng.random::<f64>() * r.width(),
                r.min_y + rng.random::<f64>() * r.height(),
            );
            if self.contains(&p) {
                return Ok(p);
            }
        }
    }

    /// Plain-text export: `rect`, `floor`, `ceiling`, then one `v x y` per vertex.
    pub fn to_text(&self) -> String {
        let r = &self.circumscribed_rect;
        let mut s = String::new();
        let _ = writeln!(s, "rect {} {} {} {}", r.min_x, r.min_y, r.max_x, r.max_y);
        let _ = writeln!(s, "floor {}", self.floor_z);
        let _ = writeln!(s, "ceiling {}", self.ceiling_z);
        for p in &self.polygon {
            let _ = writeln!(s, "v {} {}", p.x, p.y);
        }
        for i in &self.non_rectilinear_corners {
            let _ = writeln!(s, "flag {i}");
        }
        if self.fallback {
            s.push_str("fallback\n");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, GeometryError> {
        let mut rect = None;
        let mut floor_z = 0.0;
        let mut ceiling_z = 0.0;
        let mut polygon = Vec::new();
        let mut flags = Vec::new();
        let mut fallback = false;
        for (n, line) in text.lines().enumerate() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || GeometryError::Parse(format!("footprint line {}: {line:?}", n + 1));
            let num = |i: usize| parts.get(i).and_then(|s| s.parse::<f64>().ok()).ok_or_else(bad);
            match parts.first().copied() {
                None => {}
                Some("rect") => {
                    rect = Some(Rect2 {
                        min_x: num(1)?,
                        min_y: num(2)?,
                        max_x: num(3)?,
                        max_y: num(4)?,
                    })
                }
                Some("floor") => floor_z = num(1)?,
                Some("ceiling") => ceiling_z = num(1)?,
                Some("v") => polygon.push(Point2::new(num(1)?, num(2)?)),
                Some("flag") => flags.push(num(1)? as usize),
                Some("fallback") => fallback = true,
                Some(_) => return Err(bad()),
            }
        }
        Ok(Self {
            polygon,
            circumscribed_rect: rect.ok_or_else(|| GeometryError::Parse("footprint without rect".into()))?,
            floor_z,
            ceiling_z,
            non_rectilinear_corners: flags,
            fallback,
        })
    }
}

fn cross(o: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn dist_to_segment(p: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let s = if len2 == 0.0 { 0.0 } else { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) };
    (p - (a + ab * s)).norm()
}

/// Even-odd containment, with points within `tol` of an edge counted inside.
pub fn contains_point(poly: &[Point2<f64>], p: &Point2<f64>, tol: f64) -> bool {
    let n = poly.len();
    if n == 0 {
        return false;
    }
    if (0..n).any(|i| dist_to_segment(p, &poly[i], &poly[(i + 1) % n]) <= tol) {
        return true;
    }
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Andrew's monotone chain; CCW, collinear points removed.
pub fn convex_hull(points: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let mut pts: Vec<Point2<f64>> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point2<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point2<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn interior_angle_deg(prev: &Point2<f64>, cur: &Point2<f64>, next: &Point2<f64>) -> f64 {
    let a = prev - cur;
    let b = next - cur;
    let c = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

fn line_intersection(p: &Point2<f64>, d: &Vector2<f64>, q: &Point2<f64>, e: &Vector2<f64>) -> Option<Point2<f64>> {
    let den = d.x * e.y - d.y * e.x;
    if den.abs() < 1e-12 {
        return None;
    }
    let w = q - p;
    let s = (w.x * e.y - w.y * e.x) / den;
    Some(p + d * s)
}

fn strictly_inside_triangle(t: [&Point2<f64>; 3], p: &Point2<f64>) -> bool {
    let s0 = cross(t[0], t[1], p);
    let s1 = cross(t[1], t[2], p);
    let s2 = cross(t[2], t[0], p);
    let tol = CONTAIN_TOL * ((t[1] - t[0]).norm() + (t[2] - t[1]).norm() + (t[0] - t[2]).norm());
    (s0 > tol && s1 > tol && s2 > tol) || (s0 < -tol && s1 < -tol && s2 < -tol)
}

fn refine(hull: &[Point2<f64>], support: &[Point2<f64>], params: &FootprintParams) -> (Vec<Point2<f64>>, Vec<usize>) {
    let n = hull.len();
    if n < 4 {
        return (hull.to_vec(), Vec::new());
    }
    let is_right: Vec<bool> = (0..n)
        .map(|i| {
            let angle = interior_angle_deg(&hull[(i + n - 1) % n], &hull[i], &hull[(i + 1) % n]);
            (angle - 90.0).abs() <= params.right_angle_tolerance_deg
        })
        .collect();
    let mut resolved = is_right.clone();
    let mut out = Vec::with_capacity(n + 4);
    for i in 0..n {
        let a = hull[i];
        out.push(a);
        let j = (i + 1) % n;
        if is_right[i] || is_right[j] {
            continue;
        }
        let b = hull[j];
        let prev = hull[(i + n - 1) % n];
        let next = hull[(j + 1) % n];
        let d_in = (a - prev).normalize();
        let d_out = (next - b).normalize();
        if (d_in.dot(&d_out)).abs() > params.right_angle_tolerance_deg.to_radians().sin() {
            continue;
        }
        let Some(c) = line_intersection(&a, &d_out, &b, &d_in) else {
            continue;
        };
        let inward = cross(&a, &b, &c) > 0.0;
        let supported = support.iter().any(|p| (p - c).norm() <= params.notch_support_tolerance);
        let cuts_vertex = support.iter().any(|p| strictly_inside_triangle([&a, &c, &b], p));
        if inward && supported && !cuts_vertex {
            out.push(c);
            resolved[i] = true;
            resolved[j] = true;
        }
    }
    // map unresolved hull corners to their indices in the refined outline
    let mut flagged = Vec::new();
    let mut k = 0;
    for (i, p) in hull.iter().enumerate() {
        while out[k] != *p {
            k += 1;
        }
        if !resolved[i] {
            flagged.push(k);
        }
    }
    (out, flagged)
}

/// Extracts the footprint of `env` around `params.slice_height`.
pub fn extract_footprint(env: &TriMesh, params: &FootprintParams) -> Result<FootprintPolygon, GeometryError> {
    let verts = env.vertices();
    if verts.is_empty() || env.is_empty() {
        return Err(GeometryError::EmptyGeometry);
    }
    let bounds = env.aabb();
    let rect = Rect2 {
        min_x: bounds.min.x,
        min_y: bounds.min.y,
        max_x: bounds.max.x,
        max_y: bounds.max.y,
    };
    let lo = params.slice_height - params.slab_half_width;
    let hi = params.slice_height + params.slab_half_width;
    let slab: Vec<Point2<f64>> = verts
        .iter()
        .filter(|p| p.z >= lo && p.z <= hi)
        .map(|p| Point2::new(p.x, p.y))
        .collect();
    let (support, fallback) = if slab.is_empty() {
        warn!("no environment vertices within z ∈ [{lo}, {hi}]; using hull of all vertices");
        (verts.iter().map(|p| Point2::new(p.x, p.y)).collect::<Vec<_>>(), true)
    } else {
        (slab, false)
    };
    let hull = convex_hull(&support);
    let (polygon, non_rectilinear_corners) = if fallback {
        (hull, Vec::new())
    } else {
        refine(&hull, &support, params)
    };
    if !non_rectilinear_corners.is_empty() {
        warn!("{} footprint corners are not rectilinear", non_rectilinear_corners.len());
    }
    Ok(FootprintPolygon {
        polygon,
        circumscribed_rect: rect,
        floor_z: bounds.min.z,
        ceiling_z: bounds.max.z,
        non_rectilinear_corners,
        fallback,
    })
}
