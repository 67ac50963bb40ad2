use serde::{Deserialize, Serialize};

use super::config::ChannelSchedule;
use super::SimError;
use crate::pose::Pose;
use crate::sensors::CameraIntrinsics;

/// Record kinds, in the fixed per-robot publication order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    StartExperiment,
    Clock,
    ImuBody,
    ImuCamera,
    Tf,
    JointState,
    CameraPose,
    Odometry,
    Rgb,
    Depth,
}

impl ChannelKind {
    pub const PERIODIC: [ChannelKind; 9] = [
        ChannelKind::Clock,
        ChannelKind::ImuBody,
        ChannelKind::ImuCamera,
        ChannelKind::Tf,
        ChannelKind::JointState,
        ChannelKind::CameraPose,
        ChannelKind::Odometry,
        ChannelKind::Rgb,
        ChannelKind::Depth,
    ];

    /// Per-robot kinds in publication order.
    pub const ROBOT: [ChannelKind; 8] = [
        ChannelKind::ImuBody,
        ChannelKind::ImuCamera,
        ChannelKind::Tf,
        ChannelKind::JointState,
        ChannelKind::CameraPose,
        ChannelKind::Odometry,
        ChannelKind::Rgb,
        ChannelKind::Depth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::StartExperiment => "start_experiment",
            ChannelKind::Clock => "clock",
            ChannelKind::ImuBody => "imu_body",
            ChannelKind::ImuCamera => "imu_camera",
            ChannelKind::Tf => "tf",
            ChannelKind::JointState => "joint_state",
            ChannelKind::CameraPose => "camera_pose",
            ChannelKind::Odometry => "odometry",
            ChannelKind::Rgb => "rgb",
            ChannelKind::Depth => "depth",
        }
    }
}

/// Camera attached to an image channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraInfo {
    pub intrinsics: CameraIntrinsics,
    /// Body to camera (body axes).
    pub extrinsic: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelInfo {
    pub id: u16,
    pub name: String,
    pub kind: ChannelKind,
    /// Hz; 0 for the one-shot start record.
    pub rate: u32,
    pub robot: Option<String>,
    pub camera: Option<CameraInfo>,
}

/// `"<namespace>/<channel>"`.
pub fn namespace_channels(channel: &str, namespace: &str) -> String {
    format!("{namespace}/{channel}")
}

pub fn validate_namespaces<S: AsRef<str>>(namespaces: &[S]) -> Result<(), SimError> {
    let mut seen = std::collections::BTreeSet::new();
    for ns in namespaces {
        let ns = ns.as_ref();
        if ns.is_empty() || ns.starts_with('/') || ns.ends_with('/') {
            return Err(SimError::Config(format!("invalid robot namespace {ns:?}")));
        }
        if !seen.insert(ns) {
            return Err(SimError::Config(format!("duplicate robot namespace {ns:?}")));
        }
    }
    Ok(())
}

/// Channel table: start, clock, then each robot's channels in kind order.
pub fn build_channel_table(schedule: &ChannelSchedule, namespaces: &[String], camera: &CameraInfo) -> Result<Vec<ChannelInfo>, SimError> {
    validate_namespaces(namespaces)?;
    let mut out = vec![
        ChannelInfo {
            id: 0,
            name: ChannelKind::StartExperiment.name().into(),
            kind: ChannelKind::StartExperiment,
            rate: 0,
            robot: None,
            camera: None,
        },
        ChannelInfo {
            id: 1,
            name: ChannelKind::Clock.name().into(),
            kind: ChannelKind::Clock,
            rate: schedule.clock,
            robot: None,
            camera: None,
        },
    ];
    for ns in namespaces {
        for kind in ChannelKind::ROBOT {
            let id = u16::try_from(out.len()).map_err(|_| SimError::Config("too many channels".into()))?;
            let is_image = matches!(kind, ChannelKind::Rgb | ChannelKind::Depth);
            out.push(ChannelInfo {
                id,
                name: namespace_channels(kind.name(), ns),
                kind,
                rate: schedule.rate(kind),
                robot: Some(ns.clone()),
                camera: is_image.then(|| camera.clone()),
            });
        }
    }
    Ok(out)
}
