//! Deterministic stepping, multi-rate recording, the log container and replay.

pub mod channels;
pub mod config;
pub mod engine;
pub mod log;
pub mod record;
pub mod replay;
pub mod timeline;

pub use channels::{build_channel_table, namespace_channels, validate_namespaces, CameraInfo, ChannelInfo, ChannelKind};
pub use config::{ChannelSchedule, FaultConfig, RenderConfig, SimConfig};
pub use engine::{build_header, run, run_detailed, FrameSink, Penetration, RobotSpec, SimOutcome};
pub use log::{sha256_hex, LogHeader, RecordLog};
pub use record::{AssetState, Payload, Record};
pub use replay::{audit_counts, replay, NewSensor};
pub use timeline::{asset_mesh, asset_states, sample_timeline, SnapshotBuilder, Timeline};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error("schedule error: {0}")]
    Schedule(String),
    #[error(transparent)]
    Control(#[from] crate::control::ControlError),
    #[error(transparent)]
    Sensor(#[from] crate::sensors::SensorError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Scene(#[from] crate::scene::SceneError),
    #[error("log error: {0}")]
    Log(String),
    #[error("manifest/header mismatch: {0}")]
    ManifestMismatch(String),
    #[error("missing channel records: {0}")]
    MissingRecords(String),
    #[error("gap in channel {channel} at index {index}")]
    Gap { channel: String, index: u64 },
    #[error("io error: {0}")]
    Io(String),
}
