use nalgebra::{Translation3, UnitQuaternion, Vector3};
use std::f64::consts::TAU;

use super::camera::{camera_pose, CameraIntrinsics};
use super::raycast::Snapshot;
use crate::pose::Pose;

/// Picks the yaw (of `samples` evenly spaced) whose coarse depth view has the
/// largest mean hit-distance ratio within `range`; misses count as 0, so the
/// camera avoids looking into empty space. Ties go to the smaller yaw.
pub fn optimize_initial_yaw(snapshot: &Snapshot, position: Vector3<f64>, extrinsic: &Pose, k: &CameraIntrinsics, range: f64, samples: usize) -> f64 {
    let grid = (16u32, 12u32);
    let mut coarse = *k;
    coarse.fx *= grid.0 as f64 / k.width as f64;
    coarse.fy *= grid.1 as f64 / k.height as f64;
    coarse.cx *= grid.0 as f64 / k.width as f64;
    coarse.cy *= grid.1 as f64 / k.height as f64;
    coarse.width = grid.0;
    coarse.height = grid.1;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..samples.max(1) {
        let yaw = TAU * i as f64 / samples.max(1) as f64;
        let body = Pose::from_parts(Translation3::from(position), UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw));
        let cam = camera_pose(&body, extrinsic);
        let mut score = 0.0;
        for v in 0..grid.1 {
            for u in 0..grid.0 {
                let ray = coarse.pixel_ray(&cam, u, v);
                let dir_len = ray.dir.norm();
                if let Some(h) = snapshot.cast(&ray, f64::INFINITY) {
                    let dist = h.t * dir_len;
                    if dist <= range {
                        score += dist / range;
                    }
                }
            }
        }
        if score > best.0 {
            best = (score, yaw);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::wall;
    use crate::geometry::SemanticLabel;

    #[test]
    fn faces_the_only_wall() {
        let w = wall([2.0, -3.0], [2.0, 3.0], -2.0, 4.0, 2).with_instance(1, SemanticLabel::Environment);
        let snap = Snapshot::from_meshes(vec![w]).unwrap();
        let yaw = optimize_initial_yaw(&snap, Vector3::new(0.0, 0.0, 1.0), &Pose::identity(), &CameraIntrinsics::low_res(), 3.5, 36);
        let d = crate::pose::wrap_pi(yaw);
        assert!(d.abs() < 0.6, "yaw {yaw}");
    }
}
