use anyhow::{bail, Context, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};

use grade_forge::control::{JointLimits, PidGains};
use grade_forge::geometry::FootprintParams;
use grade_forge::noise::{BlurConfig, DepthNoiseConfig, ImuNoiseConfig, OcclusionConfig, RollingShutterConfig};
use grade_forge::scene::{ComposeSpec, FlyingParams, PlacementConfig, Profile};
use grade_forge::sim::{ChannelSchedule, NewSensor, SimConfig};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub config_version: u32,
    /// Overrides every module seed when set.
    pub seed: Option<u64>,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub footprint: FootprintParams,
    #[serde(default)]
    pub occupancy: OccupancySection,
    #[serde(default)]
    pub placement: PlacementConfig,
    #[serde(default)]
    pub compose: ComposeSection,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub schedule: ChannelSchedule,
    #[serde(default)]
    pub control: ControlSection,
    #[serde(default = "default_robots")]
    pub robots: Vec<RobotSection>,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub replay: ReplaySection,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub environment: Option<PathBuf>,
    /// Track JSON files used round-robin for humans; proxy walkers when empty.
    pub human_tracks: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            environment: None,
            human_tracks: Vec::new(),
            manifest: PathBuf::from("scene/manifest.json"),
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OccupancySection {
    pub resolution: f64,
    pub slab_min: f64,
    pub slab_max: f64,
}

impl Default for OccupancySection {
    fn default() -> Self {
        Self {
            resolution: 0.1,
            slab_min: 0.1,
            slab_max: 2.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComposeSection {
    pub profile: Profile,
    pub n_humans_range: (u32, u32),
    pub flying: FlyingParams,
    /// Proxy walker keyframes, walk length (m) and height (m).
    pub proxy_frames: usize,
    pub proxy_walk_distance: f64,
    pub proxy_height: f64,
}

impl Default for ComposeSection {
    fn default() -> Self {
        Self {
            profile: Profile::N,
            n_humans_range: (7, 40),
            flying: FlyingParams::default(),
            proxy_frames: 60,
            proxy_walk_distance: 2.0,
            proxy_height: 1.7,
        }
    }
}

impl ComposeSection {
    pub fn spec(&self) -> ComposeSpec {
        ComposeSpec {
            n_humans_range: self.n_humans_range,
            flying: self.flying.clone(),
            ..ComposeSpec::for_profile(self.profile)
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub gains: PidGains,
    /// Defaults to the footprint box.
    pub limits: Option<JointLimits>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSection {
    pub namespace: String,
    /// `t x y z roll pitch yaw` script (degrees).
    pub waypoints: Option<PathBuf>,
    /// `t x y z roll pitch yaw kind` stream.
    pub setpoints: Option<PathBuf>,
    /// x y z (m), roll pitch yaw (degrees).
    pub initial_joints: Option<[f64; 6]>,
}

fn default_robots() -> Vec<RobotSection> {
    vec![RobotSection {
        namespace: "robot_0".into(),
        waypoints: None,
        setpoints: None,
        initial_joints: None,
    }]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// Restore stamps from record indices before corrupting.
    pub reindex: bool,
    pub imu: ImuNoiseConfig,
    pub depth: DepthNoiseConfig,
    pub rolling_shutter_enabled: bool,
    pub rolling_shutter: RollingShutterConfig,
    pub blur_enabled: bool,
    pub blur: BlurConfig,
    pub occlusion: OcclusionConfig,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            reindex: true,
            imu: ImuNoiseConfig::default(),
            depth: DepthNoiseConfig::default(),
            rolling_shutter_enabled: false,
            rolling_shutter: RollingShutterConfig::default(),
            blur_enabled: false,
            blur: BlurConfig::default(),
            occlusion: OcclusionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplaySection {
    pub sensors: Vec<NewSensor>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub max_assoc_dt: f64,
    pub gap_factor: f64,
    pub count_startup_delay: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            max_assoc_dt: grade_forge::eval::DEFAULT_MAX_ASSOC_DT,
            gap_factor: 2.0,
            count_startup_delay: true,
        }
    }
}

impl PipelineConfig {
    /// A config with every default, as if read from `config_version = 1`.
    pub fn defaults() -> Self {
        Self::parse(&format!("config_version = {CONFIG_VERSION}")).expect("default config")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).context("invalid config")?;
        if cfg.config_version != CONFIG_VERSION {
            bail!("unsupported config_version {} (expected {CONFIG_VERSION})", cfg.config_version);
        }
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, seed: Option<u64>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::parse(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
                .with_context(|| format!("in {}", p.display()))?,
            None => Self::defaults(),
        };
        if seed.is_some() {
            cfg.seed = seed;
        }
        cfg.apply_seed();
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_seed(&mut self) {
        if let Some(s) = self.seed {
            self.placement.rng_seed = s;
            self.sim.rng_seed = s;
            self.noise.imu.rng_seed = s;
            self.noise.depth.rng_seed = s;
            self.noise.rolling_shutter.rng_seed = s;
        }
    }

    /// Re-checks every module's invariants.
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.schedule.validate(self.sim.physics_rate()?)?;
        self.placement.validate()?;
        self.compose.spec().validate()?;
        self.control.gains.validate()?;
        if let Some(l) = &self.control.limits {
            l.validate()?;
        }
        if self.robots.is_empty() {
            bail!("at least one robot is required");
        }
        grade_forge::sim::validate_namespaces(&self.robots.iter().map(|r| r.namespace.as_str()).collect::<Vec<_>>())?;
        for r in &self.robots {
            if r.waypoints.is_some() && r.setpoints.is_some() {
                bail!("robot {} has both waypoints and setpoints", r.namespace);
            }
        }
        self.noise.imu.validate()?;
        self.noise.depth.validate()?;
        self.noise.rolling_shutter.validate()?;
        self.noise.blur.validate()?;
        let o = &self.occupancy;
        if !(o.resolution > 0.0) || !(o.slab_min < o.slab_max) {
            bail!("occupancy needs resolution > 0 and slab_min < slab_max");
        }
        let e = &self.eval;
        if !(e.max_assoc_dt >= 0.0) || !(e.gap_factor > 0.0) {
            bail!("eval needs max_assoc_dt >= 0 and gap_factor > 0");
        }
        if self.compose.proxy_frames < 2 || !(self.compose.proxy_height > 0.0) {
            bail!("proxy walkers need at least 2 frames and a positive height");
        }
        Ok(())
    }
}
