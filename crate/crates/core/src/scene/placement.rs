use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::track::AnimationTrack;
use super::SceneError;
use crate::geometry::{swept_volume, Bvh, FootprintPolygon, TriMesh};
use crate::pose::{pose_from_xyz_yaw, Pose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementConfig {
    pub contact_threshold: usize,
    pub max_attempts_per_asset: usize,
    pub rng_seed: u64,
    pub yaw_randomization: bool,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            contact_threshold: 200,
            max_attempts_per_asset: 100,
            rng_seed: 0,
            yaw_randomization: true,
        }
    }
}

impl PlacementConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.max_attempts_per_asset == 0 {
            return Err(SceneError::Config("max_attempts_per_asset must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedAsset {
    pub track: AnimationTrack,
    pub world_pose: Pose,
    pub placed: bool,
    /// Candidates tried, including the accepted one.
    pub attempts: usize,
}

impl PlacedAsset {
    /// Swept volume in world coordinates.
    pub fn world_swept(&self) -> Result<TriMesh, SceneError> {
        Ok(swept_volume(&self.track)?.transformed(&self.world_pose))
    }
}

/// Places tracks one after another at random footprint positions on the floor.
///
/// A candidate is accepted when its swept volume has at most
/// `contact_threshold` contacts with the environment and with each asset
/// accepted before it.
pub fn place_humans(
    env: &TriMesh,
    footprint: &FootprintPolygon,
    tracks: &[AnimationTrack],
    cfg: &PlacementConfig,
) -> Result<Vec<PlacedAsset>, SceneError> {
    cfg.validate()?;
    if footprint.is_degenerate() {
        return Err(crate::geometry::GeometryError::EmptyFootprint.into());
    }
    let env_bvh = if env.is_empty() { None } else { Some(Bvh::build(env)?) };
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.rng_seed);
    let mut accepted: Vec<Bvh> = Vec::new();
    let mut out = Vec::with_capacity(tracks.len());
    let cap = cfg.contact_threshold + 1;

    for track in tracks {
        let swept = swept_volume(track)?;
        let mut result = PlacedAsset {
            track: track.clone(),
            world_pose: Pose::identity(),
            placed: false,
            attempts: 0,
        };
        for attempt in 1..=cfg.max_attempts_per_asset {
            let xy = footprint.sample_point(&mut rng)?;
            let yaw = if cfg.yaw_randomization { rng.random_range(0.0..TAU) } else { 0.0 };
            let pose = pose_from_xyz_yaw(Vector3::new(xy.x, xy.y, footprint.floor_z), yaw);
            let candidate = Bvh::build(&swept.transformed(&pose))?;
            let env_ok = env_bvh
                .as_ref()
                .is_none_or(|b| candidate.count_contacts_capped(b, cap) <= cfg.contact_threshold);
            let ok = env_ok && accepted.iter().all(|b| candidate.count_contacts_capped(b, cap) <= cfg.contact_threshold);
            if ok {
                log::debug!("placed {} after {attempt} attempt(s)", track.name);
                result.world_pose = pose;
                result.placed = true;
                result.attempts = attempt;
                accepted.push(candidate);
                break;
            }
            result.attempts = attempt;
        }
        if !result.placed {
            log::warn!("could not place {}; removed from the scene", track.name);
        }
        out.push(result);
    }
    Ok(out)
}
