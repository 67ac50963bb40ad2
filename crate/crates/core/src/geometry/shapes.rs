//! Procedural meshes used for fixtures, proxies and synthetic scenes.

use nalgebra::{Point3, Vector3};
use std::f64::consts::PI;

use super::{SemanticLabel, TriMesh};

/// Closed box with 8 vertices and 12 outward-facing triangles.
pub fn cuboid(min: Point3<f64>, max: Point3<f64>) -> TriMesh {
    let v = vec![
        Point3::new(min.x, min.y, min.z),
        Point3::new(max.x, min.y, min.z),
        Point3::new(max.x, max.y, min.z),
        Point3::new(min.x, max.y, min.z),
        Point3::new(min.x, min.y, max.z),
        Point3::new(max.x, min.y, max.z),
        Point3::new(max.x, max.y, max.z),
        Point3::new(min.x, max.y, max.z),
    ];
    let t = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    TriMesh::new(v, t, 0, SemanticLabel::Other).expect("static cuboid topology")
}

/// Unit cube `[0,1]³` shifted by `offset`.
pub fn unit_cube(offset: Vector3<f64>) -> TriMesh {
    cuboid(Point3::from(offset), Point3::from(offset + Vector3::repeat(1.0)))
}

/// Horizontal rectangle at height `z`, split into `nx × ny` quads.
pub fn grid_plane(min: [f64; 2], max: [f64; 2], z: f64, nx: usize, ny: usize) -> TriMesh {
    let (nx, ny) = (nx.max(1), ny.max(1));
    let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = min[0] + (max[0] - min[0]) * i as f64 / nx as f64;
            let y = min[1] + (max[1] - min[1]) * j as f64 / ny as f64;
            v.push(Point3::new(x, y, z));
        }
    }
    let mut t = Vec::with_capacity(nx * ny * 2);
    let idx = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    for j in 0..ny {
        for i in 0..nx {
            t.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            t.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriMesh::new(v, t, 0, SemanticLabel::Other).expect("grid topology")
}

/// Vertical rectangle from `a` to `b` (2D, at floor `z0`) up to `z1`, `n` segments along its length.
pub fn wall(a: [f64; 2], b: [f64; 2], z0: f64, z1: f64, n: usize) -> TriMesh {
    let n = n.max(1);
    let mut v = Vec::with_capacity(2 * (n + 1));
    for i in 0..=n {
        let s = i as f64 / n as f64;
        let x = a[0] + (b[0] - a[0]) * s;
        let y = a[1] + (b[1] - a[1]) * s;
        v.push(Point3::new(x, y, z0));
        v.push(Point3::new(x, y, z1));
    }
    let mut t = Vec::with_capacity(2 * n);
    for i in 0..n as u32 {
        let (b0, t0, b1, t1) = (2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3);
        t.push([b0, b1, t1]);
        t.push([b0, t1, t0]);
    }
    TriMesh::new(v, t, 0, SemanticLabel::Other).expect("wall topology")
}

/// Latitude/longitude sphere with its poles on the local z axis.
pub fn uv_sphere(center: Point3<f64>, radius: f64, stacks: usize, slices: usize) -> TriMesh {
    ellipsoid(center, Vector3::repeat(radius), stacks, slices)
}

pub fn ellipsoid(center: Point3<f64>, radii: Vector3<f64>, stacks: usize, slices: usize) -> TriMesh {
    let stacks = stacks.max(2);
    let slices = slices.max(3);
    let mut v = Vec::with_capacity(2 + (stacks - 1) * slices);
    v.push(center + Vector3::new(0.0, 0.0, -radii.z));
    for s in 1..stacks {
        let theta = PI * s as f64 / stacks as f64;
        let (st, ct) = theta.sin_cos();
        for k in 0..slices {
            let phi = 2.0 * PI * k as f64 / slices as f64;
            let (sp, cp) = phi.sin_cos();
            v.push(center + Vector3::new(radii.x * st * cp, radii.y * st * sp, -radii.z * ct));
        }
    }
    v.push(center + Vector3::new(0.0, 0.0, radii.z));
    let top = (v.len() - 1) as u32;
    let ring = |s: usize, k: usize| (1 + (s - 1) * slices + (k % slices)) as u32;
    let mut t = Vec::new();
    for k in 0..slices {
        t.push([0, ring(1, k + 1), ring(1, k)]);
    }
    for s in 1..stacks - 1 {
        for k in 0..slices {
            t.push([ring(s, k), ring(s, k + 1), ring(s + 1, k + 1)]);
            t.push([ring(s, k), ring(s + 1, k + 1), ring(s + 1, k)]);
        }
    }
    for k in 0..slices {
        t.push([ring(stacks - 1, k), ring(stacks - 1, k + 1), top]);
    }
    TriMesh::new(v, t, 0, SemanticLabel::Other).expect("ellipsoid topology")
}

/// Closed rectilinear room from a CCW outline: floor plate plus one wall per edge.
///
/// Floor triangles come from fanning the outline, which is only valid for
/// star-shaped outlines seen from the first vertex; the rooms used in tests
/// and demos (rectangles, L shapes) satisfy this.
pub fn room(outline: &[[f64; 2]], height: f64, wall_segments: usize) -> TriMesh {
    let mut floor_v: Vec<Point3<f64>> = outline.iter().map(|p| Point3::new(p[0], p[1], 0.0)).collect();
    let mut floor_t = Vec::new();
    for i in 1..outline.len() - 1 {
        floor_t.push([0, i as u32, i as u32 + 1]);
    }
    floor_v.shrink_to_fit();
    let mut mesh = TriMesh::new(floor_v, floor_t, 0, SemanticLabel::Environment).expect("floor topology");
    for i in 0..outline.len() {
        let a = outline[i];
        let b = outline[(i + 1) % outline.len()];
        mesh.append(&wall(a, b, 0.0, height, wall_segments));
    }
    mesh
}
