use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::SceneError;

/// Scene generation profiles. `H` variants fly with roll and pitch locked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Profile {
    N,
    HN,
    F,
    HF,
    L,
    HL,
}

impl Profile {
    pub const ALL: [Profile; 6] = [Profile::N, Profile::HN, Profile::F, Profile::HF, Profile::L, Profile::HL];

    /// (GSO, ShapeNet) flying-object counts.
    pub fn object_counts(self) -> (usize, usize) {
        match self {
            Profile::N | Profile::HN => (0, 0),
            Profile::F | Profile::HF => (5, 5),
            Profile::L | Profile::HL => (10, 10),
        }
    }

    pub fn stabilized(self) -> bool {
        matches!(self, Profile::HN | Profile::HF | Profile::HL)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Profile {
    type Err = SceneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Profile::ALL
            .into_iter()
            .find(|p| p.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| SceneError::Config(format!("unknown profile {s:?}")))
    }
}

/// Kinematics of the randomly animated flying objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlyingParams {
    pub waypoints: usize,
    /// m/s
    pub max_speed: f64,
    /// Height band above the floor, metres.
    pub altitude: (f64, f64),
    /// Seconds of motion covered by the waypoints (at least).
    pub duration: f64,
}

impl Default for FlyingParams {
    fn default() -> Self {
        Self {
            waypoints: 5,
            max_speed: 2.0,
            altitude: (0.5, 2.5),
            duration: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComposeSpec {
    pub n_humans_range: (u32, u32),
    pub n_gso_objects: usize,
    pub n_shapenet_objects: usize,
    pub profile: Profile,
    #[serde(default)]
    pub flying: FlyingParams,
}

impl ComposeSpec {
    pub fn for_profile(profile: Profile) -> Self {
        let (gso, shapenet) = profile.object_counts();
        Self {
            n_humans_range: (7, 40),
            n_gso_objects: gso,
            n_shapenet_objects: shapenet,
            profile,
            flying: FlyingParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let (lo, hi) = self.n_humans_range;
        if lo > hi {
            return Err(SceneError::Config(format!("human range ({lo}, {hi}) is empty")));
        }
        if (self.n_gso_objects, self.n_shapenet_objects) != self.profile.object_counts() {
            return Err(SceneError::Config(format!(
                "profile {} requires {:?} flying objects, got ({}, {})",
                self.profile,
                self.profile.object_counts(),
                self.n_gso_objects,
                self.n_shapenet_objects
            )));
        }
        let f = &self.flying;
        if f.waypoints < 2 || !(f.max_speed > 0.0) || !(f.duration >= 0.0) || !(f.altitude.0 <= f.altitude.1) {
            return Err(SceneError::Config("invalid flying-object parameters".into()));
        }
        Ok(())
    }
}

/// Uniform integer in the inclusive human-count range.
pub fn sample_human_count(spec: &ComposeSpec, rng_seed: u64) -> u32 {
    let (a, b) = spec.n_humans_range;
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    rng.random_range(a.min(b)..=a.max(b))
}
