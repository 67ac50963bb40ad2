use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};

use super::ControlError;
use crate::geometry::FootprintPolygon;
use crate::pose::{pose_from_joints, wrap_2pi, Pose};

/// Joint positions `(x, y, z, roll, pitch, yaw)` and velocities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub joint_pos: Vector6<f64>,
    pub joint_vel: Vector6<f64>,
    pub time: f64,
}

impl RobotState {
    pub fn at_rest(joint_pos: Vector6<f64>, time: f64) -> Self {
        let mut joint_pos = joint_pos;
        joint_pos[5] = wrap_2pi(joint_pos[5]);
        Self {
            joint_pos,
            joint_vel: Vector6::zeros(),
            time,
        }
    }

    pub fn pose(&self) -> Pose {
        pose_from_joints(&self.joint_pos)
    }

    pub fn is_finite(&self) -> bool {
        self.joint_pos.iter().chain(self.joint_vel.iter()).all(|v| v.is_finite()) && self.time.is_finite()
    }
}

/// Joint range and speed limits. Angles in radians, speeds in m/s and rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointLimits {
    pub pos_min: Vector3<f64>,
    pub pos_max: Vector3<f64>,
    /// Symmetric roll/pitch bound; 0 locks both (stabilized flight).
    pub rollpitch_max: f64,
    pub vel_xyz: f64,
    pub vel_rollpitch: f64,
    pub vel_yaw: f64,
}

impl JointLimits {
    /// Default speed limits and a ±25° (or locked) roll/pitch range over a position box.
    pub fn new(pos_min: Vector3<f64>, pos_max: Vector3<f64>, stabilized: bool) -> Self {
        Self {
            pos_min,
            pos_max,
            rollpitch_max: if stabilized { 0.0 } else { 25f64.to_radians() },
            vel_xyz: 0.5,
            vel_rollpitch: 40f64.to_radians(),
            vel_yaw: 30f64.to_radians(),
        }
    }

    /// Position box from the footprint's rectangle and floor-to-ceiling prism.
    pub fn from_footprint(fp: &FootprintPolygon, stabilized: bool) -> Self {
        let r = &fp.circumscribed_rect;
        Self::new(
            Vector3::new(r.min_x, r.min_y, fp.floor_z),
            Vector3::new(r.max_x, r.max_y, fp.ceiling_z),
            stabilized,
        )
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let all = [self.rollpitch_max, self.vel_xyz, self.vel_rollpitch, self.vel_yaw];
        if !all.iter().chain(self.pos_min.iter()).chain(self.pos_max.iter()).all(|v| v.is_finite()) {
            return Err(ControlError::NonFinite("joint limit"));
        }
        if (0..3).any(|i| self.pos_min[i] > self.pos_max[i]) {
            return Err(ControlError::InvalidParameter("position box has min > max".into()));
        }
        if self.vel_xyz <= 0.0 || self.vel_rollpitch <= 0.0 || self.vel_yaw <= 0.0 || self.rollpitch_max < 0.0 {
            return Err(ControlError::InvalidParameter("speed limits must be positive".into()));
        }
        Ok(())
    }

    pub fn stabilized(&self) -> bool {
        self.rollpitch_max == 0.0
    }

    pub fn vel_limit(&self, axis: usize) -> f64 {
        match axis {
            0..=2 => self.vel_xyz,
            3 | 4 => self.vel_rollpitch,
            _ => self.vel_yaw,
        }
    }

    /// Position interval for bounded axes; yaw wraps and has none.
    pub fn pos_range(&self, axis: usize) -> Option<(f64, f64)> {
        match axis {
            0..=2 => Some((self.pos_min[axis], self.pos_max[axis])),
            3 | 4 => Some((-self.rollpitch_max, self.rollpitch_max)),
            _ => None,
        }
    }

    pub fn clamp_velocity(&self, v: &Vector6<f64>) -> Vector6<f64> {
        Vector6::from_fn(|i, _| {
            let l = self.vel_limit(i);
            if v[i].is_finite() {
                v[i].clamp(-l, l)
            } else {
                0.0
            }
        })
    }

    /// True when `s` respects every range and speed limit.
    pub fn admits(&self, s: &RobotState) -> bool {
        (0..6).all(|i| {
            let v_ok = s.joint_vel[i].abs() <= self.vel_limit(i);
            let p = s.joint_pos[i];
            let p_ok = match self.pos_range(i) {
                Some((lo, hi)) => p >= lo && p <= hi,
                None => (0.0..std::f64::consts::TAU).contains(&p),
            };
            v_ok && p_ok
        })
    }
}
