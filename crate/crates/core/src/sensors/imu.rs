use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::SensorError;
use crate::pose::Pose;

pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    /// rad/s, body frame.
    pub angular_velocity: Vector3<f64>,
    /// m/s², body frame, gravity reaction included.
    pub linear_acceleration: Vector3<f64>,
    pub stamp: f64,
}

impl ImuSample {
    pub fn is_finite(&self) -> bool {
        self.angular_velocity.iter().chain(self.linear_acceleration.iter()).all(|v| v.is_finite()) && self.stamp.is_finite()
    }
}

/// Ideal IMU reading at the middle of three equally spaced poses.
///
/// Acceleration is the central second difference of position rotated into
/// the body frame, minus gravity `(0, 0, -gravity)`. Angular velocity is the
/// rotation vector of `R_prev⁻¹ · R_next` over `2·dt`.
pub fn imu_ground_truth(window: [(f64, &Pose); 3], gravity: f64) -> Result<ImuSample, SensorError> {
    let [(t0, p0), (t1, p1), (t2, p2)] = window;
    let dt = t1 - t0;
    let dt2 = t2 - t1;
    if !(dt > 0.0) || (dt2 - dt).abs() > 1e-9 * dt.abs().max(1.0) {
        return Err(SensorError::NonUniformSpacing);
    }
    let x0 = p0.translation.vector;
    let x1 = p1.translation.vector;
    let x2 = p2.translation.vector;
    let a_world = (x2 - 2.0 * x1 + x0) / (dt * dt);
    let g_world = Vector3::new(0.0, 0.0, -gravity);
    let linear_acceleration = p1.rotation.inverse_transform_vector(&(a_world - g_world));
    let rel = p0.rotation.inverse() * p2.rotation;
    let omega_prev = rel.scaled_axis() / (2.0 * dt);
    // express in the middle body frame
    let angular_velocity = p1.rotation.inverse_transform_vector(&(p0.rotation * omega_prev));
    Ok(ImuSample {
        angular_velocity,
        linear_acceleration,
        stamp: t1,
    })
}
