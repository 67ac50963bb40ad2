use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};
use nalgebra::Vector6;
use serde_json::json;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use grade_forge::control::{parse_setpoint_stream, HoldSource, JointLimits, SetpointSource, WaypointScript};
use grade_forge::eval::{ate_rmse, eval_csv, eval_table, missing_time, sequence_stats, stats_csv, stats_text, EvalReport, MissingTimeParams, Trajectory};
use grade_forge::geometry::io::load_mesh;
use grade_forge::geometry::{extract_footprint, rasterize_occupancy, SemanticLabel, TriMesh};
use grade_forge::noise::{
    camera_trajectory, corrupt_depth, corrupt_imu_log, detect_occluded, motion_blur, reindex_log, rolling_shutter, FrameSpec, NoiseError, StepWorld,
};
use grade_forge::scene::{compose_scene, walking_proxy, AnimationTrack, Scene, SceneManifest};
use grade_forge::sensors::export::{read_instance_png, read_pfm, write_pfm, write_rgb_png};
use grade_forge::sensors::DepthImage;
use grade_forge::sim::{replay, run_detailed, sha256_hex, ChannelKind, FrameSink, Payload, RecordLog, RobotSpec};

use crate::config::{PipelineConfig, RobotSection};
use crate::{Cli, Command};

/// Output failed an integrity check that is not a log-format error.
#[derive(Debug)]
pub struct IntegrityError(pub String);

impl std::fmt::Display for IntegrityError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for IntegrityError {}

pub fn dispatch(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    let cfg = PipelineConfig::load(cli.config.as_deref(), cli.seed)?;
    match cli.command {
        Command::Footprint { mesh, out } => footprint(&cfg, mesh, out),
        Command::Compose { mesh, out } => compose(&cfg, mesh, out),
        Command::Simulate { manifest, out, text_log } => simulate(&cfg, manifest, out, text_log),
        Command::Postprocess {
            log,
            manifest,
            frames,
            out,
            text_log,
        } => postprocess(&cfg, &log, manifest.as_deref(), frames, out, text_log),
        Command::Replay { log, manifest, out, text_log } => replay_cmd(&cfg, &log, &manifest, out, text_log),
        Command::Eval {
            gt,
            log,
            robot,
            est,
            name,
            start,
            duration,
            csv,
        } => eval(&cfg, gt, log, robot, &est, name, start, duration, csv),
        Command::Stats {
            log,
            manifest,
            robot,
            frames,
            csv,
        } => stats(&log, &manifest, robot, frames, csv),
    }
}

fn out_dir(cfg: &PipelineConfig, out: Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.unwrap_or_else(|| cfg.paths.out.clone());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn environment(cfg: &PipelineConfig, mesh: Option<PathBuf>) -> Result<(PathBuf, TriMesh)> {
    let path = mesh
        .or_else(|| cfg.paths.environment.clone())
        .ok_or_else(|| anyhow!("no environment mesh: pass --mesh or set paths.environment"))?;
    let env = load_mesh(&path).with_context(|| format!("loading {}", path.display()))?;
    Ok((path, env))
}

fn footprint(cfg: &PipelineConfig, mesh: Option<PathBuf>, out: Option<PathBuf>) -> Result<()> {
    let (_, env) = environment(cfg, mesh)?;
    let out = out_dir(cfg, out)?;
    let fp = extract_footprint(&env, &cfg.footprint)?;
    if fp.fallback {
        warn!("footprint slab was empty; using the hull of the whole mesh");
    }
    if !fp.non_rectilinear_corners.is_empty() {
        warn!("{} footprint corners are not right angles", fp.non_rectilinear_corners.len());
    }
    write(&out.join("footprint.txt"), fp.to_text())?;
    let o = &cfg.occupancy;
    let grid = rasterize_occupancy(&env, o.resolution, (o.slab_min, o.slab_max))?;
    let mut pgm = Vec::new();
    grid.write_pgm(&mut pgm)?;
    write(&out.join("occupancy.pgm"), pgm)?;
    println!(
        "footprint: {} vertices, area {:.3} m^2, floor {:.3} m, ceiling {:.3} m",
        fp.polygon.len(),
        fp.area(),
        fp.floor_z,
        fp.ceiling_z
    );
    Ok(())
}

fn human_tracks(cfg: &PipelineConfig) -> Result<Vec<AnimationTrack>> {
    if cfg.paths.human_tracks.is_empty() {
        let c = &cfg.compose;
        return Ok(vec![walking_proxy("walker", c.proxy_frames, c.proxy_walk_distance, c.proxy_height, 0)]);
    }
    cfg.paths
        .human_tracks
        .iter()
        .map(|p| {
            let track: AnimationTrack = serde_json::from_slice(&read(p)?).with_context(|| format!("parsing {}", p.display()))?;
            track.validate().with_context(|| format!("in {}", p.display()))?;
            Ok(track)
        })
        .collect()
}

fn compose(cfg: &PipelineConfig, mesh: Option<PathBuf>, out: Option<PathBuf>) -> Result<()> {
    let (path, env) = environment(cfg, mesh)?;
    let out = out_dir(cfg, out)?;
    let fp = extract_footprint(&env, &cfg.footprint)?;
    let tracks = human_tracks(cfg)?;
    let comp = compose_scene(&env, &fp, &cfg.compose.spec(), &cfg.placement, &tracks)?;
    let env_ref = fs::canonicalize(&path).unwrap_or(path);
    let manifest = comp.write(&out, &env_ref.to_string_lossy(), &fp)?;
    let placed = comp.humans.iter().filter(|a| a.placed).count();
    if placed < comp.humans.len() {
        warn!("{} of {} humans could not be placed", comp.humans.len() - placed, comp.humans.len());
    }
    println!(
        "composed profile {} with {placed}/{} humans and {} flying objects -> {}",
        manifest.profile,
        comp.humans.len(),
        comp.flying.len(),
        out.join("manifest.json").display()
    );
    Ok(())
}

fn load_scene(path: &Path) -> Result<(SceneManifest, Scene, String)> {
    let bytes = read(path)?;
    let manifest = SceneManifest::from_json(std::str::from_utf8(&bytes).context("manifest is not UTF-8")?)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let scene = manifest.load_scene(base)?;
    Ok((manifest, scene, sha256_hex(&bytes)))
}

fn robot_spec(cfg: &PipelineConfig, r: &RobotSection, limits: Option<JointLimits>) -> Result<RobotSpec> {
    let source: Box<dyn SetpointSource + Send> = if let Some(p) = &r.waypoints {
        let text = String::from_utf8(read(p)?)?;
        Box::new(WaypointScript::parse(&text).with_context(|| format!("in {}", p.display()))?)
    } else if let Some(p) = &r.setpoints {
        let text = String::from_utf8(read(p)?)?;
        Box::new(parse_setpoint_stream(&text).with_context(|| format!("in {}", p.display()))?)
    } else {
        Box::new(HoldSource::default())
    };
    let mut spec = RobotSpec::new(r.namespace.clone(), source);
    spec.gains = cfg.control.gains;
    spec.limits = limits;
    spec.initial_joints = r.initial_joints.map(|j| {
        Vector6::new(j[0], j[1], j[2], j[3].to_radians(), j[4].to_radians(), j[5].to_radians())
    });
    Ok(spec)
}

fn write_log(log: &RecordLog, dir: &Path, stem: &str, text: bool) -> Result<String> {
    let bytes = log.to_bytes();
    write(&dir.join(format!("{stem}.grlg")), &bytes)?;
    if text {
        write(&dir.join(format!("{stem}.jsonl")), log.to_json_lines())?;
    }
    Ok(sha256_hex(&bytes))
}

/// Binary or (`.jsonl`) text log; a truncated binary tail is dropped with a warning.
fn read_log(path: &Path) -> Result<RecordLog> {
    let bytes = read(path)?;
    if path.extension().is_some_and(|e| e == "jsonl") {
        let text = String::from_utf8(bytes).context("log is not UTF-8")?;
        return Ok(RecordLog::from_json_lines(&text)?);
    }
    let (log, truncated) = RecordLog::from_bytes_lenient(&bytes)?;
    if truncated {
        warn!("{} ends in a partial record", path.display());
    }
    Ok(log)
}

fn simulate(cfg: &PipelineConfig, manifest: Option<PathBuf>, out: Option<PathBuf>, text: bool) -> Result<()> {
    let manifest_path = manifest.unwrap_or_else(|| cfg.paths.manifest.clone());
    let (manifest, scene, sha) = load_scene(&manifest_path)?;
    let out = out_dir(cfg, out)?;
    let mut sim = cfg.sim.clone();
    sim.stabilized |= manifest.profile.stabilized();
    let robots = cfg.robots.iter().map(|r| robot_spec(cfg, r, cfg.control.limits)).collect::<Result<Vec<_>>>()?;
    let sink = FrameSink { root: out.join("frames") };
    let frames = sim.render.enabled.then_some(&sink);
    let started = Instant::now();
    let outcome = run_detailed(&sim, &cfg.schedule, &scene, &sha, robots, frames)?;
    let wall = started.elapsed().as_secs_f64();
    let log = &outcome.log;
    let log_sha = write_log(log, &out, "experiment", text)?;
    for ns in &log.header.robots {
        write(&out.join(format!("{ns}.tum").replace('/', "_")), Trajectory::from_log(log, ns)?.to_tum())?;
    }
    for p in &outcome.penetrations {
        log::debug!("step {}: robot {} inside instance {}", p.step, p.robot, p.instance_id);
    }
    let summary = json!({
        "seed": sim.rng_seed,
        "manifest_sha256": sha,
        "log_sha256": log_sha,
        "physics_rate": log.header.physics_rate,
        "record_duration": sim.record_duration,
        "records": log.records.len(),
        "counts": log.counts(),
        "wall_time_s": wall,
        "penetrations": outcome.penetrations.iter().map(|p| json!({"step": p.step, "robot": p.robot, "instance_id": p.instance_id})).collect::<Vec<_>>(),
    });
    write(&out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    println!("simulated {:.1} s in {wall:.2} s: {} records, log sha256 {log_sha}", sim.record_duration, log.records.len());
    Ok(())
}

/// (frame index, physics step, canonical stamp) of a robot's image records.
fn frame_records(log: &RecordLog, robot: &str, kind: ChannelKind) -> Vec<(u64, u64, f64)> {
    let Some(ch) = log.header.channels.iter().find(|c| c.kind == kind && c.robot.as_deref() == Some(robot)) else {
        return Vec::new();
    };
    log.records_on(ch.id)
        .filter_map(|r| match r.payload {
            Payload::Frame { frame, .. } => Some((frame, log.header.step_of(ch, r.index), log.header.canonical_time(ch, r.index))),
            _ => None,
        })
        .collect()
}

fn postprocess(cfg: &PipelineConfig, log_path: &Path, manifest: Option<&Path>, frames: Option<PathBuf>, out: Option<PathBuf>, text: bool) -> Result<()> {
    let n = &cfg.noise;
    let log = read_log(log_path)?;
    let out = out_dir(cfg, out)?;
    let frames = frames.unwrap_or_else(|| log_path.parent().unwrap_or(Path::new(".")).join("frames"));
    let mut noisy = if n.reindex { reindex_log(&log)? } else { log.clone() };
    noisy = corrupt_imu_log(&noisy, &n.imu)?;
    let stem = log_path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
    let sha = write_log(&noisy, &out, &format!("{stem}.noisy"), text)?;
    let all_zero = n.imu.is_zero() && n.depth.is_zero() && !n.rolling_shutter_enabled && !n.blur_enabled;
    if all_zero {
        warn!("noise config is all zero; outputs equal their inputs");
    }

    let scene = match manifest {
        Some(p) => Some(load_scene(p)?),
        None if n.rolling_shutter_enabled || n.blur_enabled => bail!("rolling shutter and motion blur need --manifest"),
        None => None,
    };
    if let Some((_, _, msha)) = &scene {
        if *msha != log.header.manifest_sha256 {
            return Err(grade_forge::sim::SimError::ManifestMismatch(format!("log was recorded with manifest {}, got {msha}", log.header.manifest_sha256)).into());
        }
    }
    let world = scene.as_ref().map(|(_, s, _)| StepWorld::new(s, log.header.physics_rate)).transpose()?;
    let world_fn = |t: f64| world.as_ref().expect("scene loaded").at(t);

    let mut occluded = Vec::new();
    let mut depth_frames = 0usize;
    let mut blurred = 0usize;
    for ns in &log.header.robots {
        let depth_ch = log.header.channels.iter().find(|c| c.kind == ChannelKind::Depth && c.robot.as_deref() == Some(ns.as_str()));
        let Some(cam) = depth_ch.and_then(|c| c.camera.clone()) else { continue };
        let trajectory = if scene.is_some() { Some(camera_trajectory(&log, ns)?) } else { None };
        let src_dir = frames.join(ns).join("depth");
        let dst = out.join("frames").join(ns);
        for (frame, step, stamp) in frame_records(&log, ns, ChannelKind::Depth) {
            let depth: DepthImage = if n.rolling_shutter_enabled {
                let spec = FrameSpec {
                    world: &world_fn,
                    trajectory: trajectory.as_ref().expect("scene loaded"),
                    intrinsics: cam.intrinsics,
                    stamp,
                };
                match rolling_shutter(&spec, &n.rolling_shutter, frame) {
                    Ok(f) => f.depth,
                    Err(NoiseError::TrajectoryTooShort { .. }) => {
                        warn!("{ns} depth frame {frame}: readout runs past the last pose; skipped");
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                }
            } else {
                let p = src_dir.join(format!("{step:06}.pfm"));
                if !p.exists() {
                    continue;
                }
                read_pfm(&read(&p)?).with_context(|| format!("in {}", p.display()))?
            };
            let d = corrupt_depth(&depth, &n.depth, frame)?;
            if detect_occluded(&d, &n.occlusion) {
                occluded.push(format!("{ns} {step}"));
            }
            let mut buf = Vec::new();
            write_pfm(&d, &mut buf)?;
            write(&dst.join("depth").join(format!("{step:06}.noisy.pfm")), buf)?;
            depth_frames += 1;
        }
        if n.blur_enabled {
            let traj = trajectory.as_ref().expect("scene loaded");
            let rgb_cam = log
                .header
                .channels
                .iter()
                .find(|c| c.kind == ChannelKind::Rgb && c.robot.as_deref() == Some(ns.as_str()))
                .and_then(|c| c.camera.clone())
                .unwrap_or(cam.clone());
            for (frame, step, stamp) in frame_records(&log, ns, ChannelKind::Rgb) {
                let spec = FrameSpec {
                    world: &world_fn,
                    trajectory: traj,
                    intrinsics: rgb_cam.intrinsics,
                    stamp,
                };
                match motion_blur(&spec, &n.blur, log.header.config.render.rgb_value_range) {
                    Ok(img) => {
                        let mut buf = Vec::new();
                        write_rgb_png(&img, &mut buf)?;
                        write(&dst.join("rgb").join(format!("{step:06}.noisy.png")), buf)?;
                        blurred += 1;
                    }
                    Err(NoiseError::TrajectoryTooShort { .. }) => warn!("{ns} rgb frame {frame}: exposure runs past the last pose; skipped"),
                    Err(e) => return Err(e.into()),
                }
            }
        }
        if let Some(w) = &world {
            w.clear();
        }
    }
    let mut listing = occluded.join("\n");
    if !listing.is_empty() {
        listing.push('\n');
    }
    write(&out.join("occluded.txt"), listing)?;
    let summary = json!({
        "input_sha256": log.sha256(),
        "log_sha256": sha,
        "reindexed": n.reindex,
        "depth_frames": depth_frames,
        "blurred_frames": blurred,
        "occluded_frames": occluded.len(),
        "all_zero": all_zero,
    });
    write(&out.join("postprocess.json"), serde_json::to_string_pretty(&summary)?)?;
    println!("postprocessed {depth_frames} depth frames ({} occluded), {blurred} blurred; log sha256 {sha}", occluded.len());
    Ok(())
}

fn replay_cmd(cfg: &PipelineConfig, log_path: &Path, manifest: &Path, out: Option<PathBuf>, text: bool) -> Result<()> {
    let log = read_log(log_path)?;
    let (_, scene, sha) = load_scene(manifest)?;
    let out = out_dir(cfg, out)?;
    let sensors = &cfg.replay.sensors;
    let sink = FrameSink { root: out.join("frames") };
    let replayed = replay(&log, &scene, &sha, sensors, (!sensors.is_empty()).then_some(&sink))?;
    let new_sha = write_log(&replayed, &out, "replay", text)?;
    if sensors.is_empty() {
        let old = log.sha256();
        if old != new_sha {
            return Err(IntegrityError(format!("replayed log {new_sha} differs from recorded log {old}")).into());
        }
        println!("replay identical: sha256 {new_sha}");
    } else {
        println!("replayed with {} new sensors: {} records, sha256 {new_sha}", sensors.len(), replayed.records.len());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn eval(
    cfg: &PipelineConfig,
    gt: Option<PathBuf>,
    log: Option<PathBuf>,
    robot: Option<String>,
    est: &Path,
    name: Option<String>,
    start: Option<f64>,
    duration: Option<f64>,
    csv: bool,
) -> Result<()> {
    let (gt_traj, bounds) = match (gt, log) {
        (Some(p), None) => (Trajectory::parse_tum(&String::from_utf8(read(&p)?)?)?, None),
        (None, Some(p)) => {
            let log = read_log(&p)?;
            let robot = robot.or_else(|| log.header.robots.first().cloned()).ok_or_else(|| anyhow!("log has no robots"))?;
            let t = Trajectory::from_log(&log, &robot)?;
            (t, Some((log.header.start_offset, log.header.config.record_duration)))
        }
        _ => bail!("pass exactly one of --gt and --log"),
    };
    let est_traj = Trajectory::parse_tum(&String::from_utf8(read(est)?)?).with_context(|| format!("in {}", est.display()))?;
    let (auto_start, auto_dur) = bounds.unwrap_or_else(|| {
        let s = gt_traj.stamps();
        match (s.first(), s.last()) {
            (Some(&a), Some(&b)) if s.len() > 1 => (a, (b - a) * s.len() as f64 / (s.len() - 1) as f64),
            (Some(&a), _) => (a, 0.0),
            _ => (0.0, 0.0),
        }
    });
    let ate = ate_rmse(&gt_traj, &est_traj, cfg.eval.max_assoc_dt)?;
    let params = MissingTimeParams {
        gap_factor: cfg.eval.gap_factor,
        sequence_start: start.unwrap_or(auto_start),
        sequence_duration: duration.unwrap_or(auto_dur),
        count_startup_delay: cfg.eval.count_startup_delay,
    };
    let missing = missing_time(&est_traj.stamps(), &params)?;
    let name = name.unwrap_or_else(|| est.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    let report = EvalReport::new(name, ate.rmse, missing, ate.matched_pairs, params.sequence_duration);
    let reports = [report];
    print!("{}", if csv { eval_csv(&reports) } else { eval_table(&reports) });
    Ok(())
}

fn stats(log_path: &Path, manifest: &Path, robot: Option<String>, frames: Option<PathBuf>, csv: bool) -> Result<()> {
    let log = read_log(log_path)?;
    let manifest = SceneManifest::load(manifest)?;
    let robot = robot.or_else(|| log.header.robots.first().cloned()).ok_or_else(|| anyhow!("log has no robots"))?;
    let humans: Vec<u32> = manifest.assets.iter().filter(|a| a.placed && a.label == SemanticLabel::Human).map(|a| a.instance_id).collect();
    let dir = frames
        .unwrap_or_else(|| log_path.parent().unwrap_or(Path::new(".")).join("frames"))
        .join(&robot)
        .join("instance");
    let mut files: BTreeMap<String, PathBuf> = BTreeMap::new();
    if dir.is_dir() {
        for e in fs::read_dir(&dir).with_context(|| format!("listing {}", dir.display()))? {
            let p = e?.path();
            if p.extension().is_some_and(|x| x == "png") {
                files.insert(p.file_name().unwrap().to_string_lossy().into_owned(), p);
            }
        }
    } else {
        info!("no instance frames under {}", dir.display());
    }
    let images = files
        .values()
        .map(|p| read_instance_png(&read(p)?).with_context(|| format!("in {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let s = sequence_stats(&log, &robot, &images, &humans)?;
    let name = log_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    print!("{}", if csv { stats_csv(&name, &s) } else { stats_text(&name, &s) });
    Ok(())
}
