use serde::{Deserialize, Serialize};

use super::channels::ChannelKind;
use super::SimError;
use crate::pose::Pose;
use crate::sensors::CameraIntrinsics;

/// Publish rates in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSchedule {
    pub clock: u32,
    pub imu_body: u32,
    pub imu_camera: u32,
    pub tf: u32,
    pub joint_state: u32,
    pub camera_pose: u32,
    pub odometry: u32,
    pub rgb: u32,
    pub depth: u32,
}

impl Default for ChannelSchedule {
    fn default() -> Self {
        Self {
            clock: 240,
            imu_body: 240,
            imu_camera: 240,
            tf: 120,
            joint_state: 120,
            camera_pose: 60,
            odometry: 60,
            rgb: 30,
            depth: 30,
        }
    }
}

impl ChannelSchedule {
    /// Rate of a channel kind; 0 for the one-shot start record.
    pub fn rate(&self, kind: ChannelKind) -> u32 {
        match kind {
            ChannelKind::StartExperiment => 0,
            ChannelKind::Clock => self.clock,
            ChannelKind::ImuBody => self.imu_body,
            ChannelKind::ImuCamera => self.imu_camera,
            ChannelKind::Tf => self.tf,
            ChannelKind::JointState => self.joint_state,
            ChannelKind::CameraPose => self.camera_pose,
            ChannelKind::Odometry => self.odometry,
            ChannelKind::Rgb => self.rgb,
            ChannelKind::Depth => self.depth,
        }
    }

    pub fn validate(&self, physics_rate: u32) -> Result<(), SimError> {
        for kind in ChannelKind::PERIODIC {
            let r = self.rate(kind);
            if r == 0 || !physics_rate.is_multiple_of(r) {
                return Err(SimError::Schedule(format!(
                    "rate {r} Hz of {} does not divide the physics rate {physics_rate} Hz",
                    kind.name()
                )));
            }
        }
        Ok(())
    }
}

/// Optional reproduction of delayed clock publication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultConfig {
    pub enabled: bool,
    /// Probability that a clock or IMU record carries a stale stamp.
    pub probability: f64,
    /// How many physics steps the stale stamp lags.
    pub delay_steps: u32,
}

impl Default for FaultConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            probability: 0.1,
            delay_steps: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    /// Ray-cast depth/instance/RGB frames on the rgb and depth channels.
    pub enabled: bool,
    /// Depth at which proxy RGB fades to black, metres.
    pub rgb_value_range: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            rgb_value_range: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub physics_dt: f64,
    pub bootstrap_duration: f64,
    pub record_duration: f64,
    pub rng_seed: u64,
    /// Roll and pitch locked at zero.
    pub stabilized: bool,
    pub gravity: f64,
    pub camera: CameraIntrinsics,
    /// Body to camera (body axes); the optical rotation is applied on top.
    pub camera_extrinsic: Pose,
    /// Camera to camera-IMU.
    pub imu_camera_extrinsic: Pose,
    /// Range for the initial-yaw heuristic, metres.
    pub yaw_search_range: f64,
    pub render: RenderConfig,
    pub fault: FaultConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            physics_dt: 1.0 / 240.0,
            bootstrap_duration: 1.0,
            record_duration: 60.0,
            rng_seed: 0,
            stabilized: false,
            gravity: crate::sensors::STANDARD_GRAVITY,
            camera: CameraIntrinsics::low_res(),
            camera_extrinsic: Pose::identity(),
            imu_camera_extrinsic: Pose::identity(),
            yaw_search_range: 3.5,
            render: RenderConfig::default(),
            fault: FaultConfig::default(),
        }
    }
}

fn whole(x: f64) -> Option<u64> {
    let r = x.round();
    ((x - r).abs() < 1e-6 && (0.0..1e15).contains(&r)).then_some(r as u64)
}

impl SimConfig {
    pub fn physics_rate(&self) -> Result<u32, SimError> {
        if !(self.physics_dt > 0.0) || !self.physics_dt.is_finite() {
            return Err(SimError::Config(format!("physics_dt = {}", self.physics_dt)));
        }
        whole(1.0 / self.physics_dt)
            .filter(|&r| r > 0 && r <= u32::MAX as u64)
            .map(|r| r as u32)
            .ok_or_else(|| SimError::Config(format!("1/physics_dt = {} is not a whole rate", 1.0 / self.physics_dt)))
    }

    fn steps(&self, duration: f64, what: &str) -> Result<u64, SimError> {
        let rate = self.physics_rate()?;
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(SimError::Config(format!("{what} = {duration}")));
        }
        whole(duration * rate as f64).ok_or_else(|| SimError::Config(format!("{what} = {duration} s is not a whole number of physics steps")))
    }

    pub fn bootstrap_steps(&self) -> Result<u64, SimError> {
        self.steps(self.bootstrap_duration, "bootstrap_duration")
    }

    pub fn record_steps(&self) -> Result<u64, SimError> {
        self.steps(self.record_duration, "record_duration")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.bootstrap_steps()?;
        self.record_steps()?;
        self.camera.validate()?;
        if !self.gravity.is_finite() || !(self.yaw_search_range > 0.0) {
            return Err(SimError::Config("gravity must be finite and yaw_search_range positive".into()));
        }
        let f = &self.fault;
        if !(0.0..=1.0).contains(&f.probability) {
            return Err(SimError::Config(format!("fault probability {} outside [0, 1]", f.probability)));
        }
        if !(self.render.rgb_value_range > 0.0) {
            return Err(SimError::Config("render.rgb_value_range must be positive".into()));
        }
        Ok(())
    }
}
