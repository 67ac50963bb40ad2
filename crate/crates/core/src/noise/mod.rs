//! Post-processing: IMU and depth noise, rolling shutter, motion blur,
//! occluded-frame detection and log re-indexing.

pub mod depth;
pub mod gaussian;
pub mod imu;
pub mod occlusion;
pub mod pipeline;
pub mod reindex;
pub mod shutter;

pub use depth::{corrupt_depth, DepthNoiseConfig};
pub use gaussian::GaussianStream;
pub use imu::{corrupt_imu, uniform_rate, ImuNoiseConfig};
pub use occlusion::{detect_occluded, OcclusionConfig};
pub use pipeline::{camera_trajectory, corrupt_imu_log, StepWorld};
pub use reindex::reindex_log;
pub use shutter::{motion_blur, rolling_shutter, BlurConfig, CameraTrajectory, FrameSpec, RollingShutterConfig, ShutterFrame};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("invalid noise config: {0}")]
    InvalidConfig(String),
    #[error("non-uniform stamps: {0}")]
    NonUniformStamps(String),
    #[error("trajectory covers [{start}, {end}] s but {t} s is needed")]
    TrajectoryTooShort { t: f64, start: f64, end: f64 },
    #[error(transparent)]
    Sensor(#[from] crate::sensors::SensorError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}
