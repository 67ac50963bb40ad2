//! Bounding volume hierarchy over a single mesh's triangles.
//!
//! Nodes are stored flat; every leaf owns a contiguous range of the
//! reordered triangle array. Node boxes carry a small margin so that
//! touching-within-tolerance contacts and grazing rays are never pruned.

use nalgebra::{Point3, Vector3};

use super::tri_tri::{is_degenerate, tri_tri_intersect, Triangle};
use super::{Aabb, GeometryError, TriMesh};

pub const DEFAULT_LEAF_SIZE: usize = 4;
const BOX_MARGIN: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvhNode {
    pub bounds: Aabb,
    pub kind: NodeKind,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<BvhNode>,
    triangles: Vec<Triangle>,
    /// Original mesh triangle index for each reordered slot.
    source_index: Vec<u32>,
    degenerate: Vec<bool>,
    leaf_size: usize,
    pub instance_id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point3<f64>,
    pub dir: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    /// Ray parameter; equals distance when `dir` is unit length.
    pub t: f64,
    pub triangle: u32,
    pub instance_id: u32,
}

impl RayHit {
    /// Nearest-first ordering with deterministic tie breaks.
    pub fn closer_than(&self, other: &RayHit) -> bool {
        (self.t, self.instance_id, self.triangle) < (other.t, other.instance_id, other.triangle)
    }
}

/// Minimum accepted ray parameter (self-intersection guard).
pub const RAY_T_MIN: f64 = 1e-9;

/// Two-sided Möller–Trumbore test.
pub fn ray_triangle(ray: &Ray, t: &Triangle, t_max: f64) -> Option<f64> {
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    let p = ray.dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - t[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = ray.dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let d = e2.dot(&q) * inv;
    (d > RAY_T_MIN && d <= t_max).then_some(d)
}

fn tri_bounds(t: &Triangle) -> Aabb {
    Aabb::from_points(t.iter())
}

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Result<Self, GeometryError> {
        Self::build_with_leaf_size(mesh, DEFAULT_LEAF_SIZE)
    }

    pub fn build_with_leaf_size(mesh: &TriMesh, leaf_size: usize) -> Result<Self, GeometryError> {
        if mesh.is_empty() {
            return Err(GeometryError::EmptyGeometry);
        }
        let leaf_size = leaf_size.max(1);
        let tris: Vec<Triangle> = mesh.triangle_iter().collect();
        let centroids: Vec<Point3<f64>> = tris
            .iter()
            .map(|t| Point3::from((t[0].coords + t[1].coords + t[2].coords) / 3.0))
            .collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * tris.len() / leaf_size + 1);
        build_node(&tris, &centroids, &mut order, 0, leaf_size, &mut nodes);
        let triangles: Vec<Triangle> = order.iter().map(|&i| tris[i as usize]).collect();
        let degenerate = triangles.iter().map(is_degenerate).collect();
        Ok(Self {
            nodes,
            triangles,
            source_index: order,
            degenerate,
            leaf_size,
            instance_id: mesh.instance_id,
        })
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn bounds(&self) -> &Aabb {
        &self.nodes[0].bounds
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Original mesh indices of triangles whose (margin-expanded) box overlaps `query`.
    pub fn query_aabb(&self, query: &Aabb) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if !node.bounds.overlaps(query) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for slot in start..start + count {
                        if tri_bounds(&self.triangles[slot as usize]).expanded(BOX_MARGIN).overlaps(query) {
                            out.push(self.source_index[slot as usize]);
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Nearest hit in `(RAY_T_MIN, t_max]`.
    pub fn intersect_ray(&self, ray: &Ray, t_max: f64) -> Option<RayHit> {
        let inv = ray.dir.map(|d| 1.0 / d);
        let mut best: Option<RayHit> = None;
        let mut limit = t_max;
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            // entries equal to the current best are kept so ties resolve by index
            if node.bounds.ray_entry(&ray.origin, &inv, limit).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for slot in start..start + count {
                        if let Some(t) = ray_triangle(ray, &self.triangles[slot as usize], limit) {
                            let hit = RayHit {
                                t,
                                triangle: self.source_index[slot as usize],
                                instance_id: self.instance_id,
                            };
                            if best.is_none_or(|b| hit.closer_than(&b)) {
                                limit = t;
                                best = Some(hit);
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best
    }

    /// Number of intersecting triangle pairs between two hierarchies.
    pub fn count_contacts(&self, other: &Bvh) -> usize {
        self.count_contacts_capped(other, usize::MAX)
    }

    /// Like [`Bvh::count_contacts`] but stops once the count exceeds `cap`,
    /// returning a value `> cap` in that case.
    pub fn count_contacts_capped(&self, other: &Bvh, cap: usize) -> usize {
        let mut count = 0usize;
        let mut stack = vec![(0u32, 0u32)];
        while let Some((i, j)) = stack.pop() {
            let a = &self.nodes[i as usize];
            let b = &other.nodes[j as usize];
            if !a.bounds.overlaps(&b.bounds) {
                continue;
            }
            match (a.kind, b.kind) {
                (NodeKind::Leaf { start: sa, count: ca }, NodeKind::Leaf { start: sb, count: cb }) => {
                    for x in sa..sa + ca {
                        if self.degenerate[x as usize] {
                            continue;
                        }
                        let ta = &self.triangles[x as usize];
                        for y in sb..sb + cb {
                            if !other.degenerate[y as usize] && tri_tri_intersect(ta, &other.triangles[y as usize]) {
                                count += 1;
                                if count > cap {
                                    return count;
                                }
                            }
                        }
                    }
                }
                (NodeKind::Inner { left, right }, NodeKind::Leaf { .. }) => {
                    stack.push((right, j));
                    stack.push((left, j));
                }
                (NodeKind::Leaf { .. }, NodeKind::Inner { left, right }) => {
                    stack.push((i, right));
                    stack.push((i, left));
                }
                (NodeKind::Inner { left: al, right: ar }, NodeKind::Inner { left: bl, right: br }) => {
                    // descend the larger box first to keep pair counts low
                    if a.bounds.extent().norm_squared() >= b.bounds.extent().norm_squared() {
                        stack.push((ar, j));
                        stack.push((al, j));
                    } else {
                        stack.push((i, br));
                        stack.push((i, bl));
                    }
                }
            }
        }
        count
    }
}

fn build_node(
    tris: &[Triangle],
    centroids: &[Point3<f64>],
    order: &mut [u32],
    offset: u32,
    leaf_size: usize,
    nodes: &mut Vec<BvhNode>,
) -> u32 {
    let bounds = order
        .iter()
        .fold(Aabb::empty(), |b, &i| b.union(&tri_bounds(&tris[i as usize])))
        .expanded(BOX_MARGIN);
    let index = nodes.len() as u32;
    nodes.push(BvhNode {
        bounds,
        kind: NodeKind::Leaf {
            start: offset,
            count: order.len() as u32,
        },
    });
    if order.len() <= leaf_size {
        return index;
    }
    let cbox = Aabb::from_points(order.iter().map(|&i| &centroids[i as usize]));
    let axis = cbox.longest_axis();
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(tris, centroids, lo, offset, leaf_size, nodes);
    let right = build_node(tris, centroids, hi, offset + mid as u32, leaf_size, nodes);
    nodes[index as usize].kind = NodeKind::Inner { left, right };
    index
}

/// Exhaustive nearest-hit search over every triangle; reference path for the BVH.
pub fn intersect_ray_brute(mesh: &TriMesh, ray: &Ray, t_max: f64) -> Option<RayHit> {
    let mut best: Option<RayHit> = None;
    for (i, t) in mesh.triangle_iter().enumerate() {
        if let Some(d) = ray_triangle(ray, &t, t_max) {
            let hit = RayHit {
                t: d,
                triangle: i as u32,
                instance_id: mesh.instance_id,
            };
            if best.is_none_or(|b| hit.closer_than(&b)) {
                best = Some(hit);
            }
        }
    }
    best
}
