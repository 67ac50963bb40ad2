use rayon::prelude::*;
use std::sync::Arc;

use super::camera::CameraIntrinsics;
use super::image::{DepthImage, InstanceImage};
use crate::geometry::bvh::intersect_ray_brute;
use crate::geometry::{Bvh, GeometryError, Ray, RayHit, SemanticLabel, TriMesh};
use crate::pose::Pose;

/// A posed mesh with its acceleration structure.
#[derive(Debug, Clone)]
pub struct SceneItem {
    pub mesh: TriMesh,
    pub bvh: Bvh,
}

impl SceneItem {
    pub fn new(mesh: TriMesh) -> Result<Self, GeometryError> {
        let bvh = Bvh::build(&mesh)?;
        Ok(Self { mesh, bvh })
    }

    pub fn instance_id(&self) -> u32 {
        self.mesh.instance_id
    }

    pub fn label(&self) -> SemanticLabel {
        self.mesh.label
    }
}

/// Immutable world geometry at one instant.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    pub items: Vec<Arc<SceneItem>>,
}

impl Snapshot {
    pub fn new(items: Vec<Arc<SceneItem>>) -> Self {
        Self { items }
    }

    /// Builds items for every non-empty mesh.
    pub fn from_meshes(meshes: Vec<TriMesh>) -> Result<Self, GeometryError> {
        let items = meshes
            .into_iter()
            .filter(|m| !m.is_empty())
            .map(|m| SceneItem::new(m).map(Arc::new))
            .collect::<Result<_, _>>()?;
        Ok(Self { items })
    }

    /// Nearest hit over all items; ties resolve by instance id then triangle.
    pub fn cast(&self, ray: &Ray, t_max: f64) -> Option<RayHit> {
        let inv = ray.dir.map(|d| 1.0 / d);
        let mut best: Option<RayHit> = None;
        for item in &self.items {
            let limit = best.map_or(t_max, |b| b.t);
            if item.bvh.bounds().ray_entry(&ray.origin, &inv, limit).is_none() {
                continue;
            }
            if let Some(h) = item.bvh.intersect_ray(ray, limit) {
                if best.is_none_or(|b| h.closer_than(&b)) {
                    best = Some(h);
                }
            }
        }
        best
    }

    /// Reference path testing every triangle of every item.
    pub fn cast_brute(&self, ray: &Ray, t_max: f64) -> Option<RayHit> {
        let mut best: Option<RayHit> = None;
        for item in &self.items {
            if let Some(h) = intersect_ray_brute(&item.mesh, ray, t_max) {
                if best.is_none_or(|b| h.closer_than(&b)) {
                    best = Some(h);
                }
            }
        }
        best
    }
}

fn shade_row(k: &CameraIntrinsics, snap: &Snapshot, pose: &Pose, v: u32, depth: &mut [f32], ids: &mut [u32], brute: bool) {
    for u in 0..k.width {
        let ray = k.pixel_ray(pose, u, v);
        let hit = if brute { snap.cast_brute(&ray, k.max_range) } else { snap.cast(&ray, k.max_range) };
        if let Some(h) = hit {
            let z = h.t as f32;
            if z > 0.0 {
                depth[u as usize] = z;
                ids[u as usize] = h.instance_id;
            }
        }
    }
}

fn render(k: &CameraIntrinsics, row_view: impl Fn(u32) -> (Arc<Snapshot>, Pose) + Sync, brute: bool) -> (DepthImage, InstanceImage) {
    let mut depth = DepthImage::zeros(k.width, k.height);
    let mut ids = InstanceImage::zeros(k.width, k.height);
    let w = k.width as usize;
    depth
        .data
        .par_chunks_mut(w)
        .zip(ids.data.par_chunks_mut(w))
        .enumerate()
        .for_each(|(v, (drow, irow))| {
            let (snap, pose) = row_view(v as u32);
            shade_row(k, &snap, &pose, v as u32, drow, irow, brute);
        });
    (depth, ids)
}

/// Depth (z-depth) and instance images by one ray per pixel centre.
pub fn raycast_camera(snapshot: &Snapshot, cam_pose: &Pose, k: &CameraIntrinsics) -> (DepthImage, InstanceImage) {
    let snap = Arc::new(snapshot.clone());
    render(k, |_| (snap.clone(), *cam_pose), false)
}

/// Same as [`raycast_camera`] without acceleration structures.
pub fn raycast_camera_brute(snapshot: &Snapshot, cam_pose: &Pose, k: &CameraIntrinsics) -> (DepthImage, InstanceImage) {
    let snap = Arc::new(snapshot.clone());
    render(k, |_| (snap.clone(), *cam_pose), true)
}

/// Renders each row with its own world snapshot and camera pose.
pub fn raycast_rows(k: &CameraIntrinsics, row_view: impl Fn(u32) -> (Arc<Snapshot>, Pose) + Sync) -> (DepthImage, InstanceImage) {
    render(k, row_view, false)
}
