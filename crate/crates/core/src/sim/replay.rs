//! Re-synthesis of an experiment from its log: poses come from recorded tf.

use serde::{Deserialize, Serialize};

use super::channels::{CameraInfo, ChannelInfo, ChannelKind};
use super::engine::{FrameSink, Renderer};
use super::log::RecordLog;
use super::record::{AssetState, Payload, Record};
use super::timeline::SnapshotBuilder;
use super::SimError;
use crate::pose::Pose;
use crate::scene::Scene;
use crate::sensors::{camera_pose, CameraIntrinsics};

/// Extra camera to synthesize during replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewSensor {
    pub name: String,
    /// Namespace of the robot carrying the camera.
    pub robot: String,
    pub intrinsics: CameraIntrinsics,
    /// Body to camera (body axes).
    pub extrinsic: Pose,
    /// Hz; must divide the robot's tf rate.
    pub rate: u32,
}

/// Every channel holds exactly the records its rate and the recording length imply.
pub fn audit_counts(log: &RecordLog) -> Result<(), SimError> {
    log.check_gaps().map_err(|e| match e {
        SimError::Gap { channel, index } => SimError::MissingRecords(format!("{channel} (gap at index {index})")),
        other => other,
    })?;
    let counts = log.counts();
    for ch in &log.header.channels {
        let want = log.expected_count(ch)?;
        let have = counts[&ch.name] as u64;
        if have != want {
            return Err(SimError::MissingRecords(format!("{}: {have} of {want}", ch.name)));
        }
    }
    Ok(())
}

fn manifest_check(log: &RecordLog, scene: &Scene, manifest_sha256: &str) -> Result<(), SimError> {
    if log.header.manifest_sha256 != manifest_sha256 {
        return Err(SimError::ManifestMismatch(format!(
            "log was recorded with manifest {}, got {manifest_sha256}",
            log.header.manifest_sha256
        )));
    }
    let first_tf = log.records.iter().find_map(|r| match &r.payload {
        Payload::Tf { assets, .. } => Some(assets),
        _ => None,
    });
    if let Some(assets) = first_tf {
        let ids: Vec<u32> = assets.iter().map(|a| a.instance_id).collect();
        let want: Vec<u32> = scene.assets.iter().map(|a| a.instance_id).collect();
        if ids != want {
            return Err(SimError::ManifestMismatch("logged assets differ from the scene's".into()));
        }
    }
    Ok(())
}

/// Reproduces the log and appends `<robot>/<name>/rgb` and `<robot>/<name>/depth`
/// channels per new sensor, rendered from logged robot and asset poses.
pub fn replay(log: &RecordLog, scene: &Scene, manifest_sha256: &str, new_sensors: &[NewSensor], frames: Option<&FrameSink>) -> Result<RecordLog, SimError> {
    manifest_check(log, scene, manifest_sha256)?;
    audit_counts(log)?;
    if new_sensors.is_empty() {
        return Ok(log.clone());
    }
    let header = &log.header;
    let mut out_header = header.clone();
    let rate = header.physics_rate;
    for s in new_sensors {
        s.intrinsics.validate()?;
        let tf = header
            .channels
            .iter()
            .find(|c| c.kind == ChannelKind::Tf && c.robot.as_deref() == Some(s.robot.as_str()))
            .ok_or_else(|| SimError::Config(format!("no robot {:?} in the log", s.robot)))?;
        if s.rate == 0 || tf.rate % s.rate != 0 {
            return Err(SimError::Schedule(format!("sensor {} rate {} Hz must divide the tf rate {} Hz", s.name, s.rate, tf.rate)));
        }
        for kind in [ChannelKind::Rgb, ChannelKind::Depth] {
            let name = format!("{}/{}/{}", s.robot, s.name, kind.name());
            if out_header.channel_by_name(&name).is_some() {
                return Err(SimError::Config(format!("channel {name} already exists")));
            }
            let id = u16::try_from(out_header.channels.len()).map_err(|_| SimError::Config("too many channels".into()))?;
            out_header.channels.push(ChannelInfo {
                id,
                name,
                kind,
                rate: s.rate,
                robot: Some(s.robot.clone()),
                camera: Some(CameraInfo {
                    intrinsics: s.intrinsics,
                    extrinsic: s.extrinsic,
                }),
            });
        }
    }

    let renderer = Renderer {
        builder: SnapshotBuilder::new(scene)?,
        value_range: header.config.render.rgb_value_range,
        sink: frames,
    };
    let steps = header.config.record_steps()?;
    let mut added: Vec<(u64, Record)> = Vec::new();
    let mut next_id = header.channels.len() as u16;
    for s in new_sensors {
        let tf = header
            .channels
            .iter()
            .find(|c| c.kind == ChannelKind::Tf && c.robot.as_deref() == Some(s.robot.as_str()))
            .expect("checked above");
        let tf_poses: Vec<(&Pose, &Vec<AssetState>)> = log
            .records_on(tf.id)
            .map(|r| match &r.payload {
                Payload::Tf { body, assets, .. } => Ok((body, assets)),
                _ => Err(SimError::Log("tf record with foreign payload".into())),
            })
            .collect::<Result<_, _>>()?;
        let (rgb_id, depth_id) = (next_id, next_id + 1);
        next_id += 2;
        let period = (rate / s.rate) as u64;
        let tf_period = (rate / tf.rate) as u64;
        let camera = format!("{}/{}", s.robot, s.name);
        let mut index = 0u64;
        let mut step = 0u64;
        while step < steps {
            let (body, assets) = tf_poses[(step / tf_period) as usize];
            let cam = camera_pose(body, &s.extrinsic);
            let r = renderer.render(assets, &cam, &s.intrinsics, &camera, step)?;
            for (id, kind) in [(rgb_id, ChannelKind::Rgb), (depth_id, ChannelKind::Depth)] {
                let ch = &out_header.channels[id as usize];
                added.push((
                    step,
                    Record {
                        channel: id,
                        index,
                        sim_time: out_header.canonical_time(ch, index),
                        payload: Payload::Frame {
                            frame: index,
                            digest: Some(r.digest(kind)),
                        },
                    },
                ));
            }
            index += 1;
            step += period;
        }
    }

    let mut merged: Vec<(u64, Record)> = log
        .records
        .iter()
        .map(|r| (header.step_of(&header.channels[r.channel as usize], r.index), r.clone()))
        .chain(added)
        .collect();
    merged.sort_by_key(|(step, r)| (*step, r.channel));
    Ok(RecordLog {
        header: out_header,
        records: merged.into_iter().map(|(_, r)| r).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;

    #[test]
    fn no_sensors_is_identity() {
        let log = run_short(0.5);
        let out = replay(&log, &small_scene(), "abc", &[], None).unwrap();
        assert_eq!(out.to_bytes(), log.to_bytes());
    }

    #[test]
    fn manifest_mismatch() {
        let log = run_short(0.1);
        let e = replay(&log, &small_scene(), "other", &[], None).unwrap_err();
        assert!(e.to_string().starts_with("manifest/header mismatch"));
    }

    #[test]
    fn truncated_log_is_rejected() {
        let log = run_short(0.5);
        let mut bytes = log.to_bytes();
        bytes.truncate(bytes.len() - 200);
        let (cut, _) = RecordLog::from_bytes_lenient(&bytes).unwrap();
        let e = replay(&cut, &small_scene(), "abc", &[], None).unwrap_err();
        assert!(e.to_string().starts_with("missing channel records"), "{e}");
    }

    #[test]
    fn new_camera_adds_channels() {
        let log = run_short(0.5);
        let cam = NewSensor {
            name: "wide".into(),
            robot: "robot_0".into(),
            intrinsics: CameraIntrinsics::from_hfov(24, 16, 100.0),
            extrinsic: Pose::identity(),
            rate: 30,
        };
        let out = replay(&log, &small_scene(), "abc", &[cam], None).unwrap();
        let c = out.counts();
        assert_eq!(c["robot_0/wide/depth"], 15);
        assert_eq!(c["robot_0/wide/rgb"], 15);
        let kept: Vec<&Record> = out.records.iter().filter(|r| (r.channel as usize) < log.header.channels.len()).collect();
        assert_eq!(kept.len(), log.records.len());
        assert!(kept.iter().zip(&log.records).all(|(a, b)| *a == b));
        audit_counts(&out).unwrap();
        let again = replay(&out, &small_scene(), "abc", &[], None).unwrap();
        assert_eq!(again.to_bytes(), out.to_bytes());
    }

    #[test]
    fn replayed_frames_match_recorded_render() {
        let mut cfg = short_config(0.2);
        cfg.camera = CameraIntrinsics::from_hfov(20, 15, 90.0);
        cfg.render.enabled = true;
        let scene = small_scene();
        let log = super::super::run(&cfg, &super::super::ChannelSchedule::default(), &scene, "abc", vec![hold("robot_0")]).unwrap();
        let same = NewSensor {
            name: "copy".into(),
            robot: "robot_0".into(),
            intrinsics: cfg.camera,
            extrinsic: cfg.camera_extrinsic,
            rate: 30,
        };
        let out = replay(&log, &scene, "abc", &[same], None).unwrap();
        let digests = |name: &str| -> Vec<Payload> {
            let id = out.header.channel_by_name(name).unwrap().id;
            out.records_on(id).map(|r| r.payload.clone()).collect()
        };
        assert_eq!(digests("robot_0/depth"), digests("robot_0/copy/depth"));
        assert_eq!(digests("robot_0/rgb"), digests("robot_0/copy/rgb"));
    }
}
