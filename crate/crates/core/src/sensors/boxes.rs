use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::camera::CameraIntrinsics;
use super::image::InstanceImage;
use super::raycast::Snapshot;
use crate::geometry::{Aabb, SemanticLabel};
use crate::pose::Pose;

/// Inclusive pixel box `[x0, y0, x1, y1]`.
pub type PixelBox = [u32; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceBoxes {
    pub instance: u32,
    pub tight: Option<PixelBox>,
    pub loose: Option<PixelBox>,
    pub bbox3d: Aabb,
    pub visible: bool,
}

const NEAR: f64 = 1e-6;

fn union(a: PixelBox, b: PixelBox) -> PixelBox {
    [a[0].min(b[0]), a[1].min(b[1]), a[2].max(b[2]), a[3].max(b[3])]
}

/// Pixel boxes of a mesh's projection: near-plane clipped triangles, pixel
/// kept when its centre falls inside the projected extent.
fn loose_box(item_mesh: &crate::geometry::TriMesh, cam_pose: &Pose, k: &CameraIntrinsics) -> Option<PixelBox> {
    let inv = cam_pose.inverse();
    let (mut umin, mut vmin, mut umax, mut vmax) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: &Point3<f64>| {
        if let Some(q) = k.project(p) {
            umin = umin.min(q.x);
            vmin = vmin.min(q.y);
            umax = umax.max(q.x);
            vmax = vmax.max(q.y);
        }
    };
    for tri in item_mesh.triangle_iter() {
        let c: Vec<Point3<f64>> = tri.iter().map(|p| inv * p).collect();
        for i in 0..3 {
            let a = c[i];
            let b = c[(i + 1) % 3];
            if a.z >= NEAR {
                grow(&a);
            }
            if (a.z >= NEAR) != (b.z >= NEAR) {
                let s = (NEAR - a.z) / (b.z - a.z);
                grow(&(a + (b - a) * s));
            }
        }
    }
    if !(umin <= umax) {
        return None;
    }
    let to_px = |lo: f64, hi: f64, n: u32| -> Option<(u32, u32)> {
        let a = (lo - 0.5 - 1e-9).ceil().max(0.0);
        let b = (hi - 0.5 + 1e-9).floor().min(n as f64 - 1.0);
        (a <= b).then_some((a as u32, b as u32))
    };
    let (x0, x1) = to_px(umin, umax, k.width)?;
    let (y0, y1) = to_px(vmin, vmax, k.height)?;
    Some([x0, y0, x1, y1])
}

/// Tight, loose and 3D boxes for every non-environment item of the snapshot.
///
/// Loose boxes are only reported for instances with at least one visible
/// pixel, and always contain the tight box.
pub fn bounding_boxes(snapshot: &Snapshot, cam_pose: &Pose, k: &CameraIntrinsics, instances: &InstanceImage) -> Vec<InstanceBoxes> {
    let mut tight: std::collections::BTreeMap<u32, PixelBox> = Default::default();
    for y in 0..instances.height {
        for (x, &id) in instances.row(y).iter().enumerate() {
            if id != 0 {
                let b = [x as u32, y, x as u32, y];
                tight.entry(id).and_modify(|t| *t = union(*t, b)).or_insert(b);
            }
        }
    }
    let mut out: Vec<InstanceBoxes> = snapshot
        .items
        .iter()
        .filter(|it| it.label() != SemanticLabel::Environment)
        .map(|it| {
            let id = it.instance_id();
            let t = tight.get(&id).copied();
            let loose = t.map(|t| loose_box(&it.mesh, cam_pose, k).map_or(t, |l| union(l, t)));
            InstanceBoxes {
                instance: id,
                tight: t,
                loose,
                bbox3d: it.mesh.aabb(),
                visible: t.is_some(),
            }
        })
        .collect();
    out.sort_by_key(|b| b.instance);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::{cuboid, wall};
    use crate::sensors::camera::camera_pose;
    use crate::sensors::raycast::raycast_camera;

    fn cam() -> Pose {
        camera_pose(&Pose::identity(), &Pose::identity())
    }

    fn cube(id: u32) -> crate::geometry::TriMesh {
        cuboid(Point3::new(3.0, -0.3, -0.3), Point3::new(3.6, 0.3, 0.3)).with_instance(id, SemanticLabel::Other)
    }

    #[test]
    fn fully_visible_cube_tight_equals_loose() {
        let k = CameraIntrinsics::from_hfov(160, 120, 90.0);
        let snap = Snapshot::from_meshes(vec![cube(4)]).unwrap();
        let (_, ids) = raycast_camera(&snap, &cam(), &k);
        let b = bounding_boxes(&snap, &cam(), &k, &ids);
        assert_eq!(b.len(), 1);
        assert!(b[0].visible);
        assert_eq!(b[0].tight, b[0].loose);
    }

    #[test]
    fn half_hidden_cube() {
        let k = CameraIntrinsics::from_hfov(160, 120, 90.0);
        // occluder covering y < 0 (image right half), between camera and cube
        let occ = wall([2.0, -2.0], [2.0, 0.0], -2.0, 2.0, 2).with_instance(9, SemanticLabel::Other);
        let snap = Snapshot::from_meshes(vec![cube(4), occ]).unwrap();
        let (_, ids) = raycast_camera(&snap, &cam(), &k);
        let b = bounding_boxes(&snap, &cam(), &k, &ids);
        let c = b.iter().find(|b| b.instance == 4).unwrap();
        let (t, l) = (c.tight.unwrap(), c.loose.unwrap());
        assert!(l[0] <= t[0] && l[1] <= t[1] && l[2] >= t[2] && l[3] >= t[3]);
        assert!(l[2] > t[2], "{t:?} {l:?}");
        // oracle: exhaustive vertex projection
        let inv = cam().inverse();
        let us: Vec<f64> = cube(4).vertices().iter().map(|p| k.project(&(inv * p)).unwrap().x).collect();
        let umax = us.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(l[2], (umax - 0.5).floor() as u32);
    }

    #[test]
    fn fully_occluded_cube() {
        let k = CameraIntrinsics::from_hfov(80, 60, 90.0);
        let occ = wall([2.0, -3.0], [2.0, 3.0], -3.0, 3.0, 2).with_instance(9, SemanticLabel::Other);
        let snap = Snapshot::from_meshes(vec![cube(4), occ]).unwrap();
        let (_, ids) = raycast_camera(&snap, &cam(), &k);
        let b = bounding_boxes(&snap, &cam(), &k, &ids);
        let c = b.iter().find(|b| b.instance == 4).unwrap();
        assert!(!c.visible && c.tight.is_none() && c.loose.is_none());
        assert_eq!(c.bbox3d.min, Point3::new(3.0, -0.3, -0.3));
    }
}
