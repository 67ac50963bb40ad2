//! Ground-truth sensors computed from world snapshots.

pub mod boxes;
pub mod camera;
pub mod export;
pub mod image;
pub mod imu;
pub mod raycast;
pub mod rgb;
pub mod yaw;

pub use boxes::{bounding_boxes, InstanceBoxes, PixelBox};
pub use camera::{body_to_optical, camera_pose, CameraIntrinsics};
pub use image::{DepthImage, InstanceImage, RgbImage};
pub use imu::{imu_ground_truth, ImuSample, STANDARD_GRAVITY};
pub use raycast::{raycast_camera, raycast_camera_brute, raycast_rows, SceneItem, Snapshot};
pub use rgb::{instance_hue, proxy_rgb};
pub use yaw::optimize_initial_yaw;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("poses are not equally spaced in time")]
    NonUniformSpacing,
    #[error("image sizes differ")]
    SizeMismatch,
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("io error: {0}")]
    Io(String),
}
