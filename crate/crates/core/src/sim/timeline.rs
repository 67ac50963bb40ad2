//! Ping-pong animation timeline and per-step world snapshots.

use std::sync::Arc;

use super::record::AssetState;
use crate::geometry::{GeometryError, TriMesh};
use crate::scene::{AnimationTrack, Motion, Scene, SceneAsset};
use crate::sensors::{SceneItem, Snapshot};

/// Playback that runs a track forward, then backward, forever.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timeline {
    pub track_duration: f64,
}

impl Timeline {
    pub fn for_track(track: &AnimationTrack) -> Self {
        Self {
            track_duration: track.duration(),
        }
    }

    /// Track phase at time `t ≥ 0`.
    pub fn phase(&self, t: f64) -> f64 {
        let d = self.track_duration;
        if !(d > 0.0) {
            return 0.0;
        }
        let u = t.max(0.0).rem_euclid(2.0 * d);
        if u <= d {
            u
        } else {
            2.0 * d - u
        }
    }
}

pub fn sample_timeline(timeline: &Timeline, track: &AnimationTrack, t: f64) -> TriMesh {
    track.sample(timeline.phase(t))
}

/// State of every scene asset at animation time `t`.
pub fn asset_states(scene: &Scene, t: f64) -> Vec<AssetState> {
    scene
        .assets
        .iter()
        .map(|a| {
            let phase = Timeline::for_track(&a.track).phase(t);
            AssetState {
                instance_id: a.instance_id,
                phase,
                pose: a.world_pose * a.track.pose_at(phase),
            }
        })
        .collect()
}

/// World-frame mesh of an asset in a logged state.
pub fn asset_mesh(asset: &SceneAsset, state: &AssetState) -> TriMesh {
    match asset.track.motion {
        Motion::Rigid { .. } => asset.track.base.transformed(&state.pose),
        Motion::Deforming { .. } => asset.track.sample(state.phase).transformed(&asset.world_pose),
    }
}

/// Builds snapshots, reusing the static environment's BVH.
pub struct SnapshotBuilder<'a> {
    scene: &'a Scene,
    environment: Arc<SceneItem>,
}

impl<'a> SnapshotBuilder<'a> {
    pub fn new(scene: &'a Scene) -> Result<Self, GeometryError> {
        Ok(Self {
            scene,
            environment: Arc::new(SceneItem::new(scene.environment.clone())?),
        })
    }

    /// Snapshot with assets posed per `states` (matched to scene assets by position).
    pub fn build(&self, states: &[AssetState]) -> Result<Snapshot, GeometryError> {
        let mut items = vec![self.environment.clone()];
        for (asset, state) in self.scene.assets.iter().zip(states) {
            items.push(Arc::new(SceneItem::new(asset_mesh(asset, state))?));
        }
        Ok(Snapshot::new(items))
    }
}
