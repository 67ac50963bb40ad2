#![allow(dead_code)]

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use grade_forge::control::HoldSource;
use grade_forge::geometry::shapes::{cuboid, ellipsoid, grid_plane, room, uv_sphere};
use grade_forge::geometry::{extract_footprint, FootprintParams, SemanticLabel, TriMesh};
use grade_forge::pose::{pose_from_xyz_yaw, Pose};
use grade_forge::scene::{walking_proxy, Scene, SceneAsset};
use grade_forge::sim::{run, ChannelSchedule, RecordLog, RobotSpec, SimConfig};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_pose(rng: &mut ChaCha20Rng, scale: f64) -> Pose {
    let t = Vector3::from_fn(|_, _| rng.random_range(-scale..=scale));
    let axis = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    Isometry3::from_parts(Translation3::from(t), UnitQuaternion::from_scaled_axis(axis * rng.random_range(0.0..3.0)))
}

/// A random primitive of at most a few hundred triangles near the origin.
pub fn random_mesh(rng: &mut ChaCha20Rng, id: u32) -> TriMesh {
    let c = Point3::from(Vector3::from_fn(|_, _| rng.random_range(-1.5..1.5)));
    let m = match rng.random_range(0..4) {
        0 => {
            let h = Vector3::from_fn(|_, _| rng.random_range(0.1..1.0));
            cuboid(c - h, c + h)
        }
        1 => uv_sphere(c, rng.random_range(0.2..1.0), rng.random_range(3..10), rng.random_range(4..16)),
        2 => ellipsoid(c, Vector3::from_fn(|_, _| rng.random_range(0.2..1.0)), rng.random_range(3..8), rng.random_range(4..12)),
        _ => {
            let n = rng.random_range(1..10);
            grid_plane([-1.5, -1.5], [1.5, 1.5], 0.0, n, n)
        }
    };
    m.transformed(&random_pose(rng, 0.8)).with_instance(id, SemanticLabel::Other)
}

pub fn rect_room(w: f64, d: f64) -> TriMesh {
    room(&[[0.0, 0.0], [w, 0.0], [w, d], [0.0, d]], 3.0, 4)
}

/// 6 x 4 m room with `walkers` animated proxies.
pub fn small_scene(walkers: usize) -> Scene {
    let env = rect_room(6.0, 4.0);
    let fp = extract_footprint(&env, &FootprintParams::default()).unwrap();
    let mut scene = Scene::static_only(env, fp);
    for i in 0..walkers {
        let id = 2 + i as u32;
        let track = walking_proxy(&format!("w{i}"), 12, 1.0, 1.7, id);
        scene.assets.push(SceneAsset {
            name: track.name.clone(),
            instance_id: id,
            track,
            world_pose: pose_from_xyz_yaw(Vector3::new(1.0 + i as f64, 1.0 + 0.5 * i as f64, 0.0), 0.4 * i as f64),
        });
    }
    scene
}

pub fn short_config(seconds: f64, seed: u64) -> SimConfig {
    SimConfig {
        record_duration: seconds,
        bootstrap_duration: 0.25,
        rng_seed: seed,
        ..SimConfig::default()
    }
}

pub fn run_hold(cfg: &SimConfig, schedule: &ChannelSchedule, scene: &Scene, robots: &[&str]) -> RecordLog {
    let specs = robots.iter().map(|ns| RobotSpec::new(*ns, Box::new(HoldSource::default()))).collect();
    run(cfg, schedule, scene, "props", specs).unwrap()
}
