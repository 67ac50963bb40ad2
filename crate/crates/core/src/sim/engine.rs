//! Fixed-step simulation loop: bootstrap, multi-rate publishing, recording.

use nalgebra::{Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::channels::{build_channel_table, CameraInfo, ChannelInfo, ChannelKind};
use super::config::{ChannelSchedule, SimConfig};
use super::log::{LogHeader, RecordLog};
use super::record::{AssetState, Payload, Record};
use super::timeline::{asset_mesh, asset_states, SnapshotBuilder};
use super::SimError;
use crate::control::{integrate_robot, JointLimits, PidController, PidGains, RobotState, Setpoint, SetpointKind, SetpointSource};
use crate::pose::Pose;
use crate::scene::Scene;
use crate::sensors::{
    bounding_boxes, camera_pose, imu_ground_truth, optimize_initial_yaw, proxy_rgb, raycast_camera, CameraIntrinsics, DepthImage, InstanceImage,
    RgbImage,
};
use crate::sensors::export::{boxes_json_lines, write_depth_png, write_instance_png, write_pfm, write_rgb_png};

/// Candidate yaws tried by the initial-orientation heuristic.
pub const YAW_SAMPLES: usize = 36;
/// Initial altitude band, metres above the floor and below the ceiling.
const ALTITUDE_MARGIN: f64 = 0.5;

pub struct RobotSpec {
    pub namespace: String,
    /// Queried with experiment time (seconds since the start record).
    pub source: Box<dyn SetpointSource + Send>,
    pub gains: PidGains,
    /// Defaults to the footprint box.
    pub limits: Option<JointLimits>,
    /// Overrides both the source's start pose and bootstrap randomization.
    pub initial_joints: Option<Vector6<f64>>,
}

impl RobotSpec {
    pub fn new(namespace: impl Into<String>, source: Box<dyn SetpointSource + Send>) -> Self {
        Self {
            namespace: namespace.into(),
            source,
            gains: PidGains::default(),
            limits: None,
            initial_joints: None,
        }
    }
}

/// Robot body inside an asset's bounding box (the robot is not collided).
#[derive(Debug, Clone, PartialEq)]
pub struct Penetration {
    pub step: u64,
    pub robot: String,
    pub instance_id: u32,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub log: RecordLog,
    pub penetrations: Vec<Penetration>,
}

/// Where rendered frames go; one directory per camera under `root`.
#[derive(Debug, Clone)]
pub struct FrameSink {
    pub root: PathBuf,
}

pub(crate) struct Rendered {
    pub depth: DepthImage,
    pub instances: InstanceImage,
    pub rgb: RgbImage,
}

impl Rendered {
    pub fn digest(&self, kind: ChannelKind) -> [u8; 32] {
        match kind {
            ChannelKind::Rgb => Sha256::digest(&self.rgb.data).into(),
            _ => Sha256::digest(self.depth.to_le_bytes()).into(),
        }
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> SimError {
    SimError::Io(format!("{}: {e}", path.display()))
}

impl FrameSink {
    fn create(&self, dir: &Path, name: &str) -> Result<BufWriter<fs::File>, SimError> {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let p = dir.join(name);
        Ok(BufWriter::new(fs::File::create(&p).map_err(|e| io(&p, e))?))
    }

    /// Writes depth (PFM and millimetre PNG), instances, proxy RGB and boxes.
    pub(crate) fn write(&self, camera: &str, frame: u64, r: &Rendered, boxes: &str) -> Result<(), SimError> {
        let dir = self.root.join(camera);
        let stem = format!("{frame:06}");
        write_pfm(&r.depth, self.create(&dir.join("depth"), &format!("{stem}.pfm"))?)?;
        write_depth_png(&r.depth, self.create(&dir.join("depth"), &format!("{stem}.png"))?)?;
        write_instance_png(&r.instances, self.create(&dir.join("instance"), &format!("{stem}.png"))?)?;
        write_rgb_png(&r.rgb, self.create(&dir.join("rgb"), &format!("{stem}.png"))?)?;
        let p = dir.join("boxes.jsonl");
        let mut f = fs::OpenOptions::new().create(true).append(true).open(&p).map_err(|e| io(&p, e))?;
        std::io::Write::write_all(&mut f, boxes.as_bytes()).map_err(|e| io(&p, e))
    }
}

pub(crate) struct Renderer<'a> {
    pub builder: SnapshotBuilder<'a>,
    pub value_range: f64,
    pub sink: Option<&'a FrameSink>,
}

impl Renderer<'_> {
    pub fn render(&self, states: &[AssetState], cam: &Pose, k: &CameraIntrinsics, camera: &str, frame: u64) -> Result<Rendered, SimError> {
        let snap = self.builder.build(states)?;
        let (depth, instances) = raycast_camera(&snap, cam, k);
        let rgb = proxy_rgb(&depth, &instances, self.value_range)?;
        let r = Rendered { depth, instances, rgb };
        if let Some(sink) = self.sink {
            let boxes = bounding_boxes(&snap, cam, k, &r.instances);
            sink.write(camera, frame, &r, &boxes_json_lines(frame, &boxes))?;
        }
        Ok(r)
    }
}

struct RobotRun {
    spec: RobotSpec,
    limits: JointLimits,
    ctrl: PidController,
    prev: RobotState,
    cur: RobotState,
    home: Vector6<f64>,
    inside: Vec<bool>,
}

/// Per-robot channel ids, in [`ChannelKind::ROBOT`] order.
fn robot_channels(channels: &[ChannelInfo], ns: &str) -> Vec<u16> {
    ChannelKind::ROBOT
        .iter()
        .map(|k| channels.iter().find(|c| c.kind == *k && c.robot.as_deref() == Some(ns)).expect("channel table").id)
        .collect()
}

fn initial_pose(scene: &Scene, config: &SimConfig, spec: &RobotSpec, limits: &JointLimits, builder: &SnapshotBuilder, rng: &mut ChaCha20Rng) -> Result<Vector6<f64>, SimError> {
    if let Some(j) = spec.initial_joints.or_else(|| spec.source.initial_joints()) {
        return Ok(j);
    }
    let fp = &scene.footprint;
    let xy = fp.sample_point(rng)?;
    let (lo, hi) = (fp.floor_z + ALTITUDE_MARGIN, fp.ceiling_z - ALTITUDE_MARGIN);
    let u: f64 = rng.random();
    let z = if hi > lo { lo + u * (hi - lo) } else { 0.5 * (fp.floor_z + fp.ceiling_z) };
    let z = z.clamp(limits.pos_min.z, limits.pos_max.z);
    let snap = builder.build(&asset_states(scene, 0.0))?;
    let position = Vector3::new(xy.x, xy.y, z);
    let yaw = optimize_initial_yaw(&snap, position, &config.camera_extrinsic, &config.camera, config.yaw_search_range, YAW_SAMPLES);
    Ok(Vector6::new(xy.x, xy.y, z, 0.0, 0.0, yaw))
}

pub fn build_header(config: &SimConfig, schedule: &ChannelSchedule, manifest_sha256: &str, namespaces: &[String]) -> Result<LogHeader, SimError> {
    config.validate()?;
    let rate = config.physics_rate()?;
    schedule.validate(rate)?;
    let camera = CameraInfo {
        intrinsics: config.camera,
        extrinsic: config.camera_extrinsic,
    };
    let channels = build_channel_table(schedule, namespaces, &camera)?;
    Ok(LogHeader {
        config: config.clone(),
        schedule: schedule.clone(),
        physics_rate: rate,
        start_offset: config.bootstrap_steps()? as f64 / rate as f64,
        manifest_sha256: manifest_sha256.to_string(),
        robots: namespaces.to_vec(),
        channels,
    })
}

pub fn run(config: &SimConfig, schedule: &ChannelSchedule, scene: &Scene, manifest_sha256: &str, robots: Vec<RobotSpec>) -> Result<RecordLog, SimError> {
    Ok(run_detailed(config, schedule, scene, manifest_sha256, robots, None)?.log)
}

/// Runs bootstrap plus recording and returns the log and penetration events.
pub fn run_detailed(
    config: &SimConfig,
    schedule: &ChannelSchedule,
    scene: &Scene,
    manifest_sha256: &str,
    robots: Vec<RobotSpec>,
    frames: Option<&FrameSink>,
) -> Result<SimOutcome, SimError> {
    if robots.is_empty() {
        return Err(SimError::Config("at least one robot is required".into()));
    }
    let namespaces: Vec<String> = robots.iter().map(|r| r.namespace.clone()).collect();
    let header = build_header(config, schedule, manifest_sha256, &namespaces)?;
    let rate = header.physics_rate;
    let dt = 1.0 / rate as f64;
    let bootstrap = config.bootstrap_steps()?;
    let steps = config.record_steps()?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.rng_seed);
    let renderer = Renderer {
        builder: SnapshotBuilder::new(scene)?,
        value_range: config.render.rgb_value_range,
        sink: frames,
    };

    let mut runs = Vec::with_capacity(robots.len());
    for spec in robots {
        let limits = spec.limits.unwrap_or_else(|| JointLimits::from_footprint(&scene.footprint, config.stabilized));
        limits.validate()?;
        spec.gains.validate()?;
        let joints = initial_pose(scene, config, &spec, &limits, &renderer.builder, &mut rng)?;
        let start = RobotState::at_rest(joints, -dt);
        runs.push(RobotRun {
            ctrl: PidController::new(spec.gains),
            limits,
            prev: start,
            cur: RobotState { time: 0.0, ..start },
            home: joints,
            inside: vec![false; scene.assets.len()],
            spec,
        });
    }

    // Bootstrap: hold the initial pose; nothing is recorded.
    for _ in 0..bootstrap {
        for r in &mut runs {
            let hold = Setpoint {
                kind: SetpointKind::Position,
                value: r.home,
                stamp: r.cur.time,
            };
            let cmd = r.ctrl.step(&r.cur, &hold, &r.limits, dt)?;
            let next = integrate_robot(&r.cur, &cmd, &r.limits, dt);
            r.prev = r.cur;
            r.cur = next;
        }
    }

    let mut log = RecordLog::new(header);
    let header = log.header.clone();
    log.records.push(Record {
        channel: 0,
        index: 0,
        sim_time: header.start_offset,
        payload: Payload::Start {
            seed: config.rng_seed,
            robots: runs.len() as u32,
        },
    });
    let robot_ids: Vec<Vec<u16>> = runs.iter().map(|r| robot_channels(&header.channels, &r.spec.namespace)).collect();
    let periods: Vec<u64> = header.channels.iter().map(|c| rate.checked_div(c.rate).map_or(0, u64::from)).collect();
    let due = |id: u16, k: u64| periods[id as usize] != 0 && k.is_multiple_of(periods[id as usize]);
    let fault = config.fault.clone();
    let mut penetrations = Vec::new();

    for k in 0..steps {
        let step_from_zero = bootstrap + k;
        let t_anim = step_from_zero as f64 / rate as f64;
        let t_exp = k as f64 / rate as f64;
        let stamp = |id: u16, rng: &mut ChaCha20Rng| -> f64 {
            let ch = &header.channels[id as usize];
            let index = k / periods[id as usize];
            let exact = header.canonical_time(ch, index);
            let faultable = matches!(ch.kind, ChannelKind::Clock | ChannelKind::ImuBody | ChannelKind::ImuCamera);
            if fault.enabled && faultable && rng.random::<f64>() < fault.probability {
                exact - fault.delay_steps as f64 / rate as f64
            } else {
                exact
            }
        };
        let push = |log: &mut RecordLog, id: u16, sim_time: f64, payload: Payload| {
            log.records.push(Record {
                channel: id,
                index: k / periods[id as usize],
                sim_time,
                payload,
            });
        };
        if due(1, k) {
            let t = stamp(1, &mut rng);
            push(&mut log, 1, t, Payload::Clock { time: header.canonical_time(&header.channels[1], k / periods[1]) });
        }
        let states = if scene.assets.is_empty() { Vec::new() } else { asset_states(scene, t_anim) };
        let mut frame_cache: Option<(usize, Rendered)> = None;

        for (ri, r) in runs.iter_mut().enumerate() {
            let sp = r.spec.source.setpoint(t_exp, &r.cur);
            let cmd = r.ctrl.step(&r.cur, &sp, &r.limits, dt)?;
            let next = integrate_robot(&r.cur, &cmd, &r.limits, dt);
            let (p0, p1, p2) = (r.prev.pose(), r.cur.pose(), next.pose());
            let ids = &robot_ids[ri];
            let cam = camera_pose(&p1, &config.camera_extrinsic);
            for (slot, &id) in ids.iter().enumerate() {
                if !due(id, k) {
                    continue;
                }
                let kind = ChannelKind::ROBOT[slot];
                let payload = match kind {
                    ChannelKind::ImuBody | ChannelKind::ImuCamera => {
                        let f = |p: &Pose| {
                            if kind == ChannelKind::ImuBody {
                                *p
                            } else {
                                p * config.camera_extrinsic * config.imu_camera_extrinsic
                            }
                        };
                        let (a, b, c) = (f(&p0), f(&p1), f(&p2));
                        let mut s = imu_ground_truth([(0.0, &a), (dt, &b), (2.0 * dt, &c)], config.gravity)?;
                        s.stamp = header.canonical_time(&header.channels[id as usize], k / periods[id as usize]);
                        Payload::Imu(s)
                    }
                    ChannelKind::Tf => {
                        for (ai, (asset, st)) in scene.assets.iter().zip(&states).enumerate() {
                            let inside = asset_mesh(asset, st).aabb().contains_point(&p1.translation.vector.into());
                            if inside && !r.inside[ai] {
                                log::debug!("{} entered asset {} at step {k}", r.spec.namespace, asset.instance_id);
                                penetrations.push(Penetration {
                                    step: k,
                                    robot: r.spec.namespace.clone(),
                                    instance_id: asset.instance_id,
                                });
                            }
                            r.inside[ai] = inside;
                        }
                        Payload::Tf {
                            body: p1,
                            camera: cam,
                            assets: states.clone(),
                        }
                    }
                    ChannelKind::JointState => Payload::JointState {
                        position: r.cur.joint_pos,
                        velocity: r.cur.joint_vel,
                    },
                    ChannelKind::CameraPose => Payload::CameraPose { pose: cam },
                    ChannelKind::Odometry => Payload::Odometry {
                        pose: p1,
                        twist: r.cur.joint_vel,
                    },
                    ChannelKind::Rgb | ChannelKind::Depth => {
                        let frame = k / periods[id as usize];
                        let digest = if config.render.enabled {
                            if frame_cache.as_ref().map(|c| c.0) != Some(ri) {
                                let rendered = renderer.render(&states, &cam, &config.camera, &r.spec.namespace, k)?;
                                frame_cache = Some((ri, rendered));
                            }
                            Some(frame_cache.as_ref().unwrap().1.digest(kind))
                        } else {
                            None
                        };
                        Payload::Frame { frame, digest }
                    }
                    ChannelKind::StartExperiment | ChannelKind::Clock => unreachable!("not a robot channel"),
                };
                let t = stamp(id, &mut rng);
                push(&mut log, id, t, payload);
            }
            r.prev = r.cur;
            r.cur = next;
        }
    }
    Ok(SimOutcome { log, penetrations })
}
