//! Rigid poses and angle helpers shared across the pipeline.

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3, Vector6};
use std::f64::consts::{PI, TAU};

/// World-frame rigid transform (rotation + translation).
pub type Pose = Isometry3<f64>;

/// Wraps an angle to `[-π, π)`.
pub fn wrap_pi(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Wraps an angle to `[0, 2π)`.
pub fn wrap_2pi(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Builds a pose from a joint vector `(x, y, z, roll, pitch, yaw)`.
pub fn pose_from_joints(joints: &Vector6<f64>) -> Pose {
    Isometry3::from_parts(
        Translation3::new(joints[0], joints[1], joints[2]),
        UnitQuaternion::from_euler_angles(joints[3], joints[4], joints[5]),
    )
}

/// Translation plus a rotation about world z.
pub fn pose_from_xyz_yaw(t: Vector3<f64>, yaw: f64) -> Pose {
    Isometry3::from_parts(
        Translation3::from(t),
        UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw),
    )
}

/// Interpolates between two poses: linear in translation, slerp in rotation.
pub fn interpolate_pose(a: &Pose, b: &Pose, u: f64) -> Pose {
    let t = a.translation.vector.lerp(&b.translation.vector, u);
    let r = a
        .rotation
        .try_slerp(&b.rotation, u, 1e-12)
        .unwrap_or(if u < 0.5 { a.rotation } else { b.rotation });
    Isometry3::from_parts(Translation3::from(t), r)
}
