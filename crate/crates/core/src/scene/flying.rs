use nalgebra::{Point3, Translation3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::f64::consts::{PI, TAU};

use super::placement::PlacedAsset;
use super::profile::ComposeSpec;
use super::track::{AnimationTrack, RigidKey};
use crate::geometry::shapes::{cuboid, ellipsoid};
use crate::geometry::{FootprintPolygon, SemanticLabel, TriMesh};
use crate::pose::Pose;

fn gso_proxy<R: Rng>(rng: &mut R) -> TriMesh {
    let h = Vector3::new(rng.random_range(0.05..0.2), rng.random_range(0.05..0.2), rng.random_range(0.05..0.2));
    cuboid(Point3::from(-h), Point3::from(h))
}

fn shapenet_proxy<R: Rng>(rng: &mut R) -> TriMesh {
    let r = Vector3::new(rng.random_range(0.1..0.4), rng.random_range(0.1..0.4), rng.random_range(0.05..0.3));
    ellipsoid(Point3::origin(), r, 5, 8)
}

/// Random rigid waypoint tracks for the profile's flying objects.
///
/// No collision checks are done. Waypoints lie inside the footprint at a
/// height drawn from the altitude band (capped at the ceiling), and segment
/// durations are stretched so no segment exceeds the speed cap.
pub fn spawn_flying_objects(spec: &ComposeSpec, footprint: &FootprintPolygon, rng_seed: u64) -> Vec<PlacedAsset> {
    let n = spec.n_gso_objects + spec.n_shapenet_objects;
    if n == 0 || footprint.is_degenerate() {
        return Vec::new();
    }
    let f = &spec.flying;
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    let z_lo = footprint.floor_z + f.altitude.0;
    let z_hi = (footprint.floor_z + f.altitude.1).min(footprint.ceiling_z).max(z_lo);
    let nominal = f.duration / (f.waypoints - 1) as f64;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let gso = i < spec.n_gso_objects;
        let base = if gso { gso_proxy(&mut rng) } else { shapenet_proxy(&mut rng) };
        let mut keys: Vec<RigidKey> = Vec::with_capacity(f.waypoints);
        let mut time = 0.0;
        for w in 0..f.waypoints {
            let xy = footprint.sample_point(&mut rng).expect("non-degenerate footprint");
            let z = if z_hi > z_lo { rng.random_range(z_lo..=z_hi) } else { z_lo };
            let rot = UnitQuaternion::from_euler_angles(rng.random_range(-PI..PI), rng.random_range(-PI..PI), rng.random_range(0.0..TAU));
            let pose = Pose::from_parts(Translation3::new(xy.x, xy.y, z), rot);
            if let Some(prev) = keys.last() {
                let dist = (pose.translation.vector - prev.pose.translation.vector).norm();
                time += nominal.max(dist / f.max_speed).max(1e-3);
            }
            debug_assert!(w == 0 || time > keys[w - 1].time);
            keys.push(RigidKey { time, pose });
        }
        let label = SemanticLabel::FlyingObject;
        let name = format!("{}_{i}", if gso { "gso" } else { "shapenet" });
        let track = AnimationTrack::rigid(name, 30.0, base.with_instance(0, label), keys).expect("increasing waypoint times");
        out.push(PlacedAsset {
            track,
            world_pose: Pose::identity(),
            placed: true,
            attempts: 0,
        });
    }
    out
}
