//! Scene composition: animated assets, collision-aware human placement,
//! flying objects and the scene manifest.

pub mod flying;
pub mod humans;
pub mod manifest;
pub mod placement;
pub mod profile;
pub mod track;

pub use flying::spawn_flying_objects;
pub use humans::walking_proxy;
pub use manifest::{compose_scene, Composition, Scene, SceneAsset, SceneManifest, ENVIRONMENT_INSTANCE};
pub use placement::{place_humans, PlacedAsset, PlacementConfig};
pub use profile::{sample_human_count, ComposeSpec, FlyingParams, Profile};
pub use track::{AnimationTrack, DeformFrame, Motion, RigidKey};

use crate::geometry::GeometryError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("config error: {0}")]
    Config(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("io error: {0}")]
    Io(String),
}
