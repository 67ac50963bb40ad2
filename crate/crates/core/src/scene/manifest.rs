//! Scene manifest: the on-disk record of a composed scene's initial configuration.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use super::placement::{place_humans, PlacedAsset, PlacementConfig};
use super::profile::{sample_human_count, ComposeSpec, Profile};
use super::track::AnimationTrack;
use super::{flying::spawn_flying_objects, SceneError};
use crate::geometry::{io::load_mesh, FootprintPolygon, SemanticLabel, TriMesh};
use crate::pose::Pose;

pub const MANIFEST_VERSION: u32 = 1;
/// Instance id of the static environment; assets are numbered after it.
pub const ENVIRONMENT_INSTANCE: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestAsset {
    pub name: String,
    pub label: SemanticLabel,
    /// Track JSON, relative to the manifest's directory.
    pub track_path: String,
    pub instance_id: u32,
    pub world_pose: Pose,
    pub placed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneManifest {
    pub manifest_version: u32,
    pub seed: u64,
    pub profile: Profile,
    /// Environment mesh (STL/OBJ), relative to the manifest's directory unless absolute.
    pub environment: String,
    pub footprint: FootprintPolygon,
    pub assets: Vec<ManifestAsset>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneAsset {
    pub name: String,
    pub instance_id: u32,
    pub track: AnimationTrack,
    pub world_pose: Pose,
}

/// Everything the simulation needs: static environment plus placed assets.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub environment: TriMesh,
    pub footprint: FootprintPolygon,
    pub assets: Vec<SceneAsset>,
}

/// Result of composition: all processed assets, placed or not, with ids.
#[derive(Debug, Clone)]
pub struct Composition {
    pub seed: u64,
    pub profile: Profile,
    pub humans: Vec<PlacedAsset>,
    pub flying: Vec<PlacedAsset>,
}

impl Composition {
    /// Assets in id order: humans first, then flying objects.
    pub fn all(&self) -> impl Iterator<Item = &PlacedAsset> {
        self.humans.iter().chain(self.flying.iter())
    }

    /// Scene made of the placed assets only.
    pub fn to_scene(&self, environment: TriMesh, footprint: FootprintPolygon) -> Scene {
        let assets = self
            .all()
            .enumerate()
            .filter(|(_, a)| a.placed)
            .map(|(i, a)| SceneAsset {
                name: a.track.name.clone(),
                instance_id: ENVIRONMENT_INSTANCE + 1 + i as u32,
                track: a.track.clone(),
                world_pose: a.world_pose,
            })
            .collect();
        Scene {
            environment: environment.with_instance(ENVIRONMENT_INSTANCE, SemanticLabel::Environment),
            footprint,
            assets,
        }
    }

    /// Writes `manifest.json` and one track file per asset into `dir`.
    pub fn write(&self, dir: &Path, environment: &str, footprint: &FootprintPolygon) -> Result<SceneManifest, SceneError> {
        let tracks_dir = dir.join("tracks");
        std::fs::create_dir_all(&tracks_dir).map_err(|e| SceneError::Io(e.to_string()))?;
        let mut assets = Vec::new();
        for (i, a) in self.all().enumerate() {
            let id = ENVIRONMENT_INSTANCE + 1 + i as u32;
            let rel = format!("tracks/{id:04}_{}.json", a.track.name);
            let mut track = a.track.clone();
            track.base.instance_id = id;
            let body = serde_json::to_vec(&track).map_err(|e| SceneError::Io(e.to_string()))?;
            std::fs::write(dir.join(&rel), body).map_err(|e| SceneError::Io(e.to_string()))?;
            assets.push(ManifestAsset {
                name: a.track.name.clone(),
                label: a.track.base.label,
                track_path: rel,
                instance_id: id,
                world_pose: a.world_pose,
                placed: a.placed,
            });
        }
        let manifest = SceneManifest {
            manifest_version: MANIFEST_VERSION,
            seed: self.seed,
            profile: self.profile,
            environment: environment.to_string(),
            footprint: footprint.clone(),
            assets,
        };
        manifest.save(&dir.join("manifest.json"))?;
        Ok(manifest)
    }
}

/// Samples the human count, places that many tracks (cycling through
/// `human_tracks`), then spawns the profile's flying objects.
pub fn compose_scene(
    env: &TriMesh,
    footprint: &FootprintPolygon,
    spec: &ComposeSpec,
    placement: &PlacementConfig,
    human_tracks: &[AnimationTrack],
) -> Result<Composition, SceneError> {
    spec.validate()?;
    let seed = placement.rng_seed;
    let n = sample_human_count(spec, seed) as usize;
    if n > 0 && human_tracks.is_empty() {
        return Err(SceneError::Config("no human tracks supplied".into()));
    }
    let tracks: Vec<AnimationTrack> = (0..n)
        .map(|i| {
            let mut t = human_tracks[i % human_tracks.len()].clone();
            t.name = format!("human_{i:02}");
            t.base.label = SemanticLabel::Human;
            t
        })
        .collect();
    let cfg = PlacementConfig {
        rng_seed: seed.wrapping_add(1),
        ..placement.clone()
    };
    let humans = place_humans(env, footprint, &tracks, &cfg)?;
    let flying = spawn_flying_objects(spec, footprint, seed.wrapping_add(2));
    Ok(Composition {
        seed,
        profile: spec.profile,
        humans,
        flying,
    })
}

impl SceneManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let m: SceneManifest = serde_json::from_str(text).map_err(|e| SceneError::Manifest(e.to_string()))?;
        if m.manifest_version != MANIFEST_VERSION {
            return Err(SceneError::Manifest(format!("unsupported manifest_version {}", m.manifest_version)));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<(), SceneError> {
        std::fs::write(path, self.to_json()).map_err(|e| SceneError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, SceneError> {
        let text = std::fs::read_to_string(path).map_err(|e| SceneError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn resolve(base: &Path, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }

    /// Loads the environment and every placed track. Unplaced assets are skipped.
    pub fn load_scene(&self, base_dir: &Path) -> Result<Scene, SceneError> {
        let env = load_mesh(&Self::resolve(base_dir, &self.environment))?;
        let mut assets = Vec::new();
        for a in self.assets.iter().filter(|a| a.placed) {
            let path = Self::resolve(base_dir, &a.track_path);
            let text = std::fs::read_to_string(&path).map_err(|e| SceneError::Io(format!("{}: {e}", path.display())))?;
            let mut track: AnimationTrack = serde_json::from_str(&text).map_err(|e| SceneError::Manifest(format!("{}: {e}", path.display())))?;
            track.validate()?;
            track.base.instance_id = a.instance_id;
            assets.push(SceneAsset {
                name: a.name.clone(),
                instance_id: a.instance_id,
                track,
                world_pose: a.world_pose,
            });
        }
        Ok(Scene {
            environment: env.with_instance(ENVIRONMENT_INSTANCE, SemanticLabel::Environment),
            footprint: self.footprint.clone(),
            assets,
        })
    }
}

impl Scene {
    /// Scene with no animated assets.
    pub fn static_only(environment: TriMesh, footprint: FootprintPolygon) -> Self {
        Self {
            environment: environment.with_instance(ENVIRONMENT_INSTANCE, SemanticLabel::Environment),
            footprint,
            assets: Vec::new(),
        }
    }

    pub fn instance_ids(&self) -> Vec<u32> {
        std::iter::once(ENVIRONMENT_INSTANCE).chain(self.assets.iter().map(|a| a.instance_id)).collect()
    }

    pub fn human_ids(&self) -> Vec<u32> {
        self.assets
            .iter()
            .filter(|a| a.track.base.label == SemanticLabel::Human)
            .map(|a| a.instance_id)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::io::write_stl_binary;
    use crate::geometry::shapes::room;
    use crate::geometry::{extract_footprint, FootprintParams};
    use crate::scene::humans::walking_proxy;

    #[test]
    fn write_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let env = room(&[[0.0, 0.0], [12.0, 0.0], [12.0, 10.0], [0.0, 10.0]], 3.0, 2);
        let mut f = std::fs::File::create(dir.path().join("env.stl")).unwrap();
        write_stl_binary(&env, &mut f).unwrap();
        let fp = extract_footprint(&env, &FootprintParams::default()).unwrap();
        let mut spec = ComposeSpec::for_profile(Profile::F);
        spec.n_humans_range = (3, 3);
        let placement = PlacementConfig {
            rng_seed: 5,
            ..Default::default()
        };
        let tracks = vec![walking_proxy("walk", 6, 0.5, 1.7, 0)];
        let comp = compose_scene(&env, &fp, &spec, &placement, &tracks).unwrap();
        assert_eq!(comp.humans.len(), 3);
        assert_eq!(comp.flying.len(), 10);
        let m = comp.write(dir.path(), "env.stl", &fp).unwrap();
        let back = SceneManifest::load(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(back, m);
        let scene = back.load_scene(dir.path()).unwrap();
        let placed = comp.all().filter(|a| a.placed).count();
        assert_eq!(scene.assets.len(), placed);
        assert_eq!(scene.instance_ids()[0], ENVIRONMENT_INSTANCE);
        assert_eq!(scene.environment.triangles().len(), env.triangles().len());
    }

    #[test]
    fn rejects_unknown_version() {
        let env = room(&[[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]], 3.0, 1);
        let fp = extract_footprint(&env, &FootprintParams::default()).unwrap();
        let m = SceneManifest {
            manifest_version: 2,
            seed: 0,
            profile: Profile::N,
            environment: "x.stl".into(),
            footprint: fp,
            assets: vec![],
        };
        assert!(SceneManifest::from_json(&m.to_json()).is_err());
    }
}
