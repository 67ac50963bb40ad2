//! Rolling-shutter and motion-blur renders from a camera trajectory.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::gaussian::GaussianStream;
use super::NoiseError;
use crate::pose::{interpolate_pose, Pose};
use crate::sensors::{proxy_rgb, raycast_camera, raycast_rows, CameraIntrinsics, DepthImage, InstanceImage, RgbImage, Snapshot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RollingShutterConfig {
    /// Mean per-frame readout duration, seconds.
    pub mu: f64,
    pub sigma: f64,
    pub rng_seed: u64,
}

impl Default for RollingShutterConfig {
    fn default() -> Self {
        Self {
            mu: 0.015,
            sigma: 0.006,
            rng_seed: 0,
        }
    }
}

impl RollingShutterConfig {
    pub fn validate(&self) -> Result<(), NoiseError> {
        if !self.mu.is_finite() || !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(NoiseError::InvalidConfig("rolling shutter needs finite mu and sigma >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlurConfig {
    /// Seconds.
    pub exposure: f64,
    pub subframes: u32,
}

impl Default for BlurConfig {
    fn default() -> Self {
        Self {
            exposure: 0.01,
            subframes: 8,
        }
    }
}

impl BlurConfig {
    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.exposure >= 0.0) || !self.exposure.is_finite() || self.subframes == 0 {
            return Err(NoiseError::InvalidConfig("blur needs exposure >= 0 and subframes >= 1".into()));
        }
        Ok(())
    }
}

/// Timed camera poses (optical frame), interpolated between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraTrajectory {
    samples: Vec<(f64, Pose)>,
}

impl CameraTrajectory {
    pub fn new(samples: Vec<(f64, Pose)>) -> Result<Self, NoiseError> {
        if samples.is_empty() || samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(NoiseError::InvalidConfig("trajectory stamps must be non-empty and increasing".into()));
        }
        Ok(Self { samples })
    }

    /// A camera that never moves, valid at all times.
    pub fn fixed(pose: Pose) -> Self {
        Self {
            samples: vec![(f64::NEG_INFINITY, pose), (f64::INFINITY, pose)],
        }
    }

    pub fn span(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    pub fn pose_at(&self, t: f64) -> Result<Pose, NoiseError> {
        let (lo, hi) = self.span();
        if !(t >= lo && t <= hi) {
            return Err(NoiseError::TrajectoryTooShort { t, start: lo, end: hi });
        }
        let i = self.samples.partition_point(|s| s.0 <= t);
        let (ta, a) = self.samples[i - 1];
        if ta == t || i == self.samples.len() {
            return Ok(a);
        }
        let (tb, b) = self.samples[i];
        if a == b {
            return Ok(a);
        }
        Ok(interpolate_pose(&a, &b, (t - ta) / (tb - ta)))
    }
}

/// World and camera motion around one frame.
pub struct FrameSpec<'a> {
    /// World snapshot at a time.
    pub world: &'a (dyn Fn(f64) -> Arc<Snapshot> + Sync),
    pub trajectory: &'a CameraTrajectory,
    pub intrinsics: CameraIntrinsics,
    pub stamp: f64,
}

impl FrameSpec<'_> {
    /// Global-shutter, zero-exposure render at the frame stamp.
    pub fn render_sharp(&self) -> Result<(DepthImage, InstanceImage), NoiseError> {
        let pose = self.trajectory.pose_at(self.stamp)?;
        Ok(raycast_camera(&(self.world)(self.stamp), &pose, &self.intrinsics))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShutterFrame {
    pub depth: DepthImage,
    pub instances: InstanceImage,
    /// Seconds; one per image row.
    pub row_stamps: Vec<f64>,
    pub readout: f64,
}

/// Per-frame readout `Δ ~ N(mu, sigma²)` clamped at 0; row `r` is rendered
/// at `stamp + Δ·r/(height−1)` under that instant's camera pose and world.
pub fn rolling_shutter(spec: &FrameSpec, cfg: &RollingShutterConfig, frame: u64) -> Result<ShutterFrame, NoiseError> {
    cfg.validate()?;
    let mut g = GaussianStream::new(cfg.rng_seed, frame);
    let readout = (cfg.mu + cfg.sigma * g.standard_normal()).max(0.0);
    let h = spec.intrinsics.height;
    let row_stamps: Vec<f64> = (0..h)
        .map(|r| if h > 1 { spec.stamp + readout * r as f64 / (h - 1) as f64 } else { spec.stamp })
        .collect();
    let poses = row_stamps.iter().map(|&t| spec.trajectory.pose_at(t)).collect::<Result<Vec<_>, _>>()?;
    let mut worlds: Vec<Arc<Snapshot>> = Vec::with_capacity(h as usize);
    for (r, &t) in row_stamps.iter().enumerate() {
        if r > 0 && t == row_stamps[r - 1] {
            worlds.push(worlds[r - 1].clone());
        } else {
            worlds.push((spec.world)(t));
        }
    }
    let (depth, instances) = raycast_rows(&spec.intrinsics, |v| (worlds[v as usize].clone(), poses[v as usize]));
    Ok(ShutterFrame {
        depth,
        instances,
        row_stamps,
        readout,
    })
}

/// Equal-weight average of `subframes` proxy-RGB renders spread uniformly
/// over `[stamp, stamp + exposure]`, rounded to nearest.
pub fn motion_blur(spec: &FrameSpec, cfg: &BlurConfig, rgb_value_range: f64) -> Result<RgbImage, NoiseError> {
    cfg.validate()?;
    let n = cfg.subframes;
    if n == 1 || cfg.exposure == 0.0 {
        let (d, i) = spec.render_sharp()?;
        return Ok(proxy_rgb(&d, &i, rgb_value_range)?);
    }
    let k = &spec.intrinsics;
    let mut sum = vec![0u32; 3 * k.pixel_count()];
    for s in 0..n {
        let t = spec.stamp + cfg.exposure * s as f64 / (n - 1) as f64;
        let pose = spec.trajectory.pose_at(t)?;
        let (d, i) = raycast_camera(&(spec.world)(t), &pose, k);
        let rgb = proxy_rgb(&d, &i, rgb_value_range)?;
        for (acc, v) in sum.iter_mut().zip(&rgb.data) {
            *acc += *v as u32;
        }
    }
    Ok(RgbImage {
        width: k.width,
        height: k.height,
        data: sum.into_iter().map(|v| ((v + n / 2) / n) as u8).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::{uv_sphere, wall};
    use crate::geometry::SemanticLabel;
    use crate::pose::pose_from_xyz_yaw;
    use crate::sensors::camera_pose;
    use nalgebra::Vector3;

    fn wall_scene() -> Arc<Snapshot> {
        let w = wall([3.0, -4.0], [3.0, 4.0], -3.0, 3.0, 4).with_instance(1, SemanticLabel::Environment);
        let half = wall([2.0, 0.0], [2.0, 4.0], -3.0, 3.0, 4).with_instance(2, SemanticLabel::Human);
        Arc::new(Snapshot::from_meshes(vec![w, half]).unwrap())
    }

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::from_hfov(64, 48, 90.0)
    }

    #[test]
    fn static_rolling_shutter_is_global() {
        let snap = wall_scene();
        let world = move |_t: f64| snap.clone();
        let traj = CameraTrajectory::fixed(camera_pose(&pose_from_xyz_yaw(Vector3::zeros(), 0.2), &Pose::identity()));
        let spec = FrameSpec {
            world: &world,
            trajectory: &traj,
            intrinsics: k(),
            stamp: 1.0,
        };
        let (d, i) = spec.render_sharp().unwrap();
        let rs = rolling_shutter(&spec, &RollingShutterConfig::default(), 0).unwrap();
        assert!(rs.readout > 0.0);
        assert_eq!((rs.depth, rs.instances), (d.clone(), i.clone()));
        let blur = motion_blur(&spec, &BlurConfig::default(), 10.0).unwrap();
        assert_eq!(blur, proxy_rgb(&d, &i, 10.0).unwrap());
    }

    fn yawing(omega: f64) -> CameraTrajectory {
        let samples = (0..=100)
            .map(|i| {
                let t = i as f64 * 0.001;
                (t, camera_pose(&pose_from_xyz_yaw(Vector3::zeros(), omega * t), &Pose::identity()))
            })
            .collect();
        CameraTrajectory::new(samples).unwrap()
    }

    #[test]
    fn zero_parameters_are_global_shutter() {
        let snap = wall_scene();
        let world = move |_t: f64| snap.clone();
        let traj = yawing(1.0);
        let spec = FrameSpec {
            world: &world,
            trajectory: &traj,
            intrinsics: k(),
            stamp: 0.02,
        };
        let cfg = RollingShutterConfig { mu: 0.0, sigma: 0.0, rng_seed: 0 };
        let rs = rolling_shutter(&spec, &cfg, 0).unwrap();
        assert_eq!((rs.depth, rs.instances), spec.render_sharp().unwrap());
        let blur = BlurConfig { exposure: 0.0, subframes: 5 };
        let (d, i) = spec.render_sharp().unwrap();
        assert_eq!(motion_blur(&spec, &blur, 10.0).unwrap(), proxy_rgb(&d, &i, 10.0).unwrap());
    }

    #[test]
    fn short_trajectory_errors() {
        let snap = wall_scene();
        let world = move |_t: f64| snap.clone();
        let traj = yawing(1.0);
        let spec = FrameSpec {
            world: &world,
            trajectory: &traj,
            intrinsics: k(),
            stamp: 0.095,
        };
        let cfg = RollingShutterConfig { mu: 0.015, sigma: 0.0, rng_seed: 0 };
        assert!(matches!(rolling_shutter(&spec, &cfg, 0), Err(NoiseError::TrajectoryTooShort { .. })));
    }

    #[test]
    fn blur_spreads_a_sphere() {
        let ball = uv_sphere(nalgebra::Point3::new(2.0, 0.0, 0.0), 0.1, 8, 12).with_instance(3, SemanticLabel::FlyingObject);
        let snap = Arc::new(Snapshot::from_meshes(vec![ball]).unwrap());
        let world = move |_t: f64| snap.clone();
        let samples = (0..=10)
            .map(|i| {
                let t = i as f64 * 0.01;
                (t, camera_pose(&pose_from_xyz_yaw(Vector3::new(0.0, 2.0 * t, 0.0), 0.0), &Pose::identity()))
            })
            .collect();
        let traj = CameraTrajectory::new(samples).unwrap();
        let spec = FrameSpec {
            world: &world,
            trajectory: &traj,
            intrinsics: k(),
            stamp: 0.0,
        };
        let sharp = motion_blur(&spec, &BlurConfig { exposure: 0.0, subframes: 1 }, 10.0).unwrap();
        let blurred = motion_blur(&spec, &BlurConfig { exposure: 0.05, subframes: 16 }, 10.0).unwrap();
        let lit = |img: &RgbImage| img.data.chunks(3).filter(|p| p.iter().any(|&c| c > 0)).count();
        assert!(lit(&blurred) > lit(&sharp));
    }
}
