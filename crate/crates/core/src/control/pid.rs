use nalgebra::Vector6;
use serde::{Deserialize, Serialize};

use super::limits::{JointLimits, RobotState};
use super::setpoints::{Setpoint, SetpointKind};
use super::ControlError;
use crate::pose::{wrap_2pi, wrap_pi};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: Vector6<f64>,
    pub ki: Vector6<f64>,
    pub kd: Vector6<f64>,
    pub integral_clamp: Vector6<f64>,
}

impl Default for PidGains {
    fn default() -> Self {
        Self::uniform(2.0, 0.2, 0.05, 1.0)
    }
}

impl PidGains {
    pub fn uniform(kp: f64, ki: f64, kd: f64, integral_clamp: f64) -> Self {
        Self {
            kp: Vector6::repeat(kp),
            ki: Vector6::repeat(ki),
            kd: Vector6::repeat(kd),
            integral_clamp: Vector6::repeat(integral_clamp),
        }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let all = self.kp.iter().chain(self.ki.iter()).chain(self.kd.iter()).chain(self.integral_clamp.iter());
        if !all.clone().all(|v| v.is_finite()) {
            return Err(ControlError::NonFinite("gain"));
        }
        if self.integral_clamp.iter().any(|&c| c <= 0.0) {
            return Err(ControlError::InvalidParameter("integral_clamp must be positive".into()));
        }
        Ok(())
    }
}

/// Per-robot PID state.
///
/// Position setpoints: `kp·e + ki·∫e − kd·vel`, with the yaw error wrapped.
/// Velocity setpoints are tracked through a moving position reference that
/// starts at the current pose and advances by the (clamped) setpoint each
/// step; the command is `sp + kp·e + ki·∫e + kd·(sp − vel)` with `e` the
/// reference error. The integral is clamped, frozen on saturated axes and
/// reset when the setpoint kind changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PidController {
    pub gains: PidGains,
    integral: Vector6<f64>,
    kind: Option<SetpointKind>,
    reference: Vector6<f64>,
}

impl PidController {
    pub fn new(gains: PidGains) -> Self {
        Self {
            gains,
            integral: Vector6::zeros(),
            kind: None,
            reference: Vector6::zeros(),
        }
    }

    pub fn integral(&self) -> &Vector6<f64> {
        &self.integral
    }

    pub fn step(&mut self, state: &RobotState, sp: &Setpoint, limits: &JointLimits, dt: f64) -> Result<Vector6<f64>, ControlError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(ControlError::InvalidParameter(format!("dt = {dt}")));
        }
        if !state.is_finite() {
            return Err(ControlError::NonFinite("state"));
        }
        if !sp.value.iter().all(|v| v.is_finite()) || !sp.stamp.is_finite() {
            return Err(ControlError::NonFinite("setpoint"));
        }
        if self.kind != Some(sp.kind) {
            self.integral = Vector6::zeros();
            self.reference = state.joint_pos;
            self.kind = Some(sp.kind);
        }
        let g = self.gains;
        let pos = &state.joint_pos;
        let vel = &state.joint_vel;
        let before = self.integral;
        let raw = match sp.kind {
            SetpointKind::Position => {
                let mut e = sp.value - pos;
                e[5] = wrap_pi(sp.value[5] - pos[5]);
                self.accumulate(&e, dt);
                Vector6::from_fn(|i, _| g.kp[i] * e[i] + g.ki[i] * self.integral[i] - g.kd[i] * vel[i])
            }
            SetpointKind::Velocity => {
                let target = limits.clamp_velocity(&sp.value);
                for i in 0..6 {
                    let r = self.reference[i] + target[i] * dt;
                    self.reference[i] = match limits.pos_range(i) {
                        Some((lo, hi)) => r.clamp(lo, hi),
                        None => wrap_2pi(r),
                    };
                }
                let mut e = self.reference - pos;
                e[5] = wrap_pi(self.reference[5] - pos[5]);
                self.accumulate(&e, dt);
                Vector6::from_fn(|i, _| target[i] + g.kp[i] * e[i] + g.ki[i] * self.integral[i] + g.kd[i] * (target[i] - vel[i]))
            }
        };
        // conditional integration: keep the old integral on axes pushing
        // further into saturation
        let mut raw = raw;
        for i in 0..6 {
            let l = limits.vel_limit(i);
            let grew = (self.integral[i] - before[i]) * raw[i] > 0.0;
            if raw[i].abs() > l && grew {
                raw[i] -= g.ki[i] * (self.integral[i] - before[i]);
                self.integral[i] = before[i];
            }
        }
        Ok(limits.clamp_velocity(&raw))
    }

    fn accumulate(&mut self, e: &Vector6<f64>, dt: f64) {
        for i in 0..6 {
            let c = self.gains.integral_clamp[i];
            self.integral[i] = (self.integral[i] + e[i] * dt).clamp(-c, c);
        }
    }
}

/// One controller update; see [`PidController`].
pub fn pid_step(
    ctrl: &mut PidController,
    state: &RobotState,
    sp: &Setpoint,
    limits: &JointLimits,
    dt: f64,
) -> Result<Vector6<f64>, ControlError> {
    ctrl.step(state, sp, limits, dt)
}

/// Semi-implicit Euler step with speed and range saturation.
///
/// Axes stopped by a range bound have their velocity zeroed; yaw wraps to
/// `[0, 2π)`. Non-finite command components are treated as zero.
pub fn integrate_robot(state: &RobotState, cmd: &Vector6<f64>, limits: &JointLimits, dt: f64) -> RobotState {
    let mut vel = limits.clamp_velocity(cmd);
    let mut pos = state.joint_pos;
    for i in 0..6 {
        let p = pos[i] + vel[i] * dt;
        pos[i] = match limits.pos_range(i) {
            Some((lo, hi)) => {
                if p < lo || p > hi {
                    vel[i] = 0.0;
                }
                p.clamp(lo, hi)
            }
            None => wrap_2pi(p),
        };
    }
    RobotState {
        joint_pos: pos,
        joint_vel: vel,
        time: state.time + dt,
    }
}
