use nalgebra::Vector6;
use serde::{Deserialize, Serialize};

use super::gaussian::GaussianStream;
use super::NoiseError;
use crate::sensors::ImuSample;

/// Continuous-time IMU noise parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImuNoiseConfig {
    /// rad/s/√Hz
    pub gyro_noise_density: f64,
    /// m/s²/√Hz
    pub accel_noise_density: f64,
    /// rad/s²/√Hz
    pub gyro_bias_walk: f64,
    /// m/s³/√Hz
    pub accel_bias_walk: f64,
    /// Gyro xyz then accel xyz.
    pub initial_bias: Vector6<f64>,
    pub rng_seed: u64,
}

impl Default for ImuNoiseConfig {
    fn default() -> Self {
        Self {
            gyro_noise_density: 8.7e-5,
            accel_noise_density: 4.9e-3,
            gyro_bias_walk: 1e-5,
            accel_bias_walk: 1e-4,
            initial_bias: Vector6::zeros(),
            rng_seed: 0,
        }
    }
}

impl ImuNoiseConfig {
    pub fn zero() -> Self {
        Self {
            gyro_noise_density: 0.0,
            accel_noise_density: 0.0,
            gyro_bias_walk: 0.0,
            accel_bias_walk: 0.0,
            initial_bias: Vector6::zeros(),
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        let d = [self.gyro_noise_density, self.accel_noise_density, self.gyro_bias_walk, self.accel_bias_walk];
        if !d.iter().all(|v| v.is_finite() && *v >= 0.0) || !self.initial_bias.iter().all(|v| v.is_finite()) {
            return Err(NoiseError::InvalidConfig("IMU noise densities must be finite and non-negative".into()));
        }
        Ok(())
    }

    fn gyro_active(&self) -> bool {
        self.gyro_noise_density != 0.0 || self.gyro_bias_walk != 0.0 || self.initial_bias.fixed_rows::<3>(0).iter().any(|v| *v != 0.0)
    }

    fn accel_active(&self) -> bool {
        self.accel_noise_density != 0.0 || self.accel_bias_walk != 0.0 || self.initial_bias.fixed_rows::<3>(3).iter().any(|v| *v != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        !self.gyro_active() && !self.accel_active()
    }
}

/// Sample rate of a uniformly stamped stream.
pub fn uniform_rate(stamps: &[f64]) -> Result<f64, NoiseError> {
    if stamps.len() < 2 {
        return Err(NoiseError::NonUniformStamps("fewer than two samples".into()));
    }
    let dt = (stamps[stamps.len() - 1] - stamps[0]) / (stamps.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(NoiseError::NonUniformStamps("stamps do not increase".into()));
    }
    for (i, w) in stamps.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
            return Err(NoiseError::NonUniformStamps(format!("spacing changes at sample {}", i + 1)));
        }
    }
    Ok(1.0 / dt)
}

/// Adds a bias random walk and white noise to a uniformly sampled stream.
///
/// Per sample the bias first steps by `N(0, walk²/f)`, then the output is
/// `clean + bias + N(0, density²·f)`. Twelve draws per sample, gyro before
/// accel, walk before white noise. `stream` selects an independent sequence.
pub fn corrupt_imu(clean: &[ImuSample], cfg: &ImuNoiseConfig, stream: u64) -> Result<Vec<ImuSample>, NoiseError> {
    cfg.validate()?;
    if cfg.is_zero() || clean.is_empty() {
        return Ok(clean.to_vec());
    }
    let stamps: Vec<f64> = clean.iter().map(|s| s.stamp).collect();
    let f = uniform_rate(&stamps)?;
    let mut g = GaussianStream::new(cfg.rng_seed, stream);
    let walk = [cfg.gyro_bias_walk, cfg.accel_bias_walk];
    let density = [cfg.gyro_noise_density, cfg.accel_noise_density];
    let active = [cfg.gyro_active(), cfg.accel_active()];
    let mut bias = cfg.initial_bias;
    let mut out = Vec::with_capacity(clean.len());
    for s in clean {
        let mut noisy = *s;
        for group in 0..2 {
            let sd_walk = walk[group] * (1.0 / f).sqrt();
            let sd_white = density[group] * f.sqrt();
            let walk_draw: [f64; 3] = std::array::from_fn(|_| g.standard_normal());
            let white_draw: [f64; 3] = std::array::from_fn(|_| g.standard_normal());
            if !active[group] {
                continue;
            }
            let v = if group == 0 { &mut noisy.angular_velocity } else { &mut noisy.linear_acceleration };
            for a in 0..3 {
                bias[3 * group + a] += sd_walk * walk_draw[a];
                v[a] += bias[3 * group + a] + sd_white * white_draw[a];
            }
        }
        out.push(noisy);
    }
    Ok(out)
}
