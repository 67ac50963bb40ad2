//! Helpers applying the corruption models to recorded experiments.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::imu::{corrupt_imu, ImuNoiseConfig};
use super::shutter::CameraTrajectory;
use super::NoiseError;
use crate::scene::Scene;
use crate::sensors::{ImuSample, Snapshot};
use crate::sim::{asset_states, ChannelKind, Payload, RecordLog, SimError, SnapshotBuilder};

/// Corrupts every IMU channel; channel `id` uses noise stream `id`.
pub fn corrupt_imu_log(log: &RecordLog, cfg: &ImuNoiseConfig) -> Result<RecordLog, NoiseError> {
    let mut out = log.clone();
    for ch in log.header.channels.iter().filter(|c| matches!(c.kind, ChannelKind::ImuBody | ChannelKind::ImuCamera)) {
        let positions: Vec<usize> = out.records.iter().enumerate().filter(|(_, r)| r.channel == ch.id).map(|(i, _)| i).collect();
        let clean: Vec<ImuSample> = positions
            .iter()
            .map(|&i| match out.records[i].payload {
                Payload::Imu(s) => Ok(s),
                _ => Err(SimError::Log(format!("non-IMU payload on {}", ch.name))),
            })
            .collect::<Result<_, _>>()?;
        let noisy = corrupt_imu(&clean, cfg, ch.id as u64)?;
        for (i, s) in positions.into_iter().zip(noisy) {
            out.records[i].payload = Payload::Imu(s);
        }
    }
    Ok(out)
}

/// Optical-frame camera trajectory of `robot` from its tf records.
pub fn camera_trajectory(log: &RecordLog, robot: &str) -> Result<CameraTrajectory, NoiseError> {
    let tf = log
        .header
        .channels
        .iter()
        .find(|c| c.kind == ChannelKind::Tf && c.robot.as_deref() == Some(robot))
        .ok_or_else(|| SimError::Config(format!("no robot {robot:?} in the log")))?;
    let samples = log
        .records_on(tf.id)
        .filter_map(|r| match &r.payload {
            Payload::Tf { camera, .. } => Some((log.header.canonical_time(tf, r.index), *camera)),
            _ => None,
        })
        .collect();
    CameraTrajectory::new(samples)
}

/// World snapshots at physics-step resolution, cached per step.
pub struct StepWorld<'a> {
    scene: &'a Scene,
    builder: SnapshotBuilder<'a>,
    rate: f64,
    cache: Mutex<HashMap<i64, Arc<Snapshot>>>,
}

impl<'a> StepWorld<'a> {
    pub fn new(scene: &'a Scene, physics_rate: u32) -> Result<Self, NoiseError> {
        Ok(Self {
            scene,
            builder: SnapshotBuilder::new(scene).map_err(SimError::from)?,
            rate: physics_rate as f64,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// World at the last physics step at or before `t`.
    pub fn at(&self, t: f64) -> Arc<Snapshot> {
        let step = (t * self.rate + 1e-9).floor() as i64;
        let mut cache = self.cache.lock().expect("snapshot cache");
        cache
            .entry(step)
            .or_insert_with(|| {
                let states = asset_states(self.scene, step as f64 / self.rate);
                Arc::new(self.builder.build(&states).expect("scene meshes are valid"))
            })
            .clone()
    }

    pub fn clear(&self) {
        self.cache.lock().expect("snapshot cache").clear();
    }
}
