use serde::{Deserialize, Serialize};

use super::gaussian::GaussianStream;
use super::NoiseError;
use crate::sensors::DepthImage;

/// Range limit plus `σ(z) = sigma_a + sigma_b·z²` Gaussian noise and dropout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DepthNoiseConfig {
    /// Metres; `null` (infinity) disables range limiting.
    #[serde(with = "crate::sensors::camera::range_serde")]
    pub max_range: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub dropout_prob: f64,
    pub rng_seed: u64,
}

impl Default for DepthNoiseConfig {
    fn default() -> Self {
        Self {
            max_range: 3.5,
            sigma_a: 0.001,
            sigma_b: 0.0019,
            dropout_prob: 0.0,
            rng_seed: 0,
        }
    }
}

/// Smallest depth a noisy valid pixel may take.
const MIN_DEPTH: f32 = 1e-6;

impl DepthNoiseConfig {
    /// No noise, no dropout and no range limit.
    pub fn zero() -> Self {
        Self {
            max_range: f64::INFINITY,
            sigma_a: 0.0,
            sigma_b: 0.0,
            dropout_prob: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.max_range > 0.0) {
            return Err(NoiseError::InvalidConfig(format!("max_range {}", self.max_range)));
        }
        if !(self.sigma_a >= 0.0 && self.sigma_b >= 0.0) || !self.sigma_a.is_finite() || !self.sigma_b.is_finite() {
            return Err(NoiseError::InvalidConfig("depth sigmas must be finite and non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.dropout_prob) {
            return Err(NoiseError::InvalidConfig(format!("dropout_prob {}", self.dropout_prob)));
        }
        Ok(())
    }

    pub fn sigma(&self, z: f64) -> f64 {
        self.sigma_a + self.sigma_b * z * z
    }

    pub fn is_zero(&self) -> bool {
        self.max_range == f64::INFINITY && self.sigma_a == 0.0 && self.sigma_b == 0.0 && self.dropout_prob == 0.0
    }
}

/// Largest f32 not above `m`.
fn f32_floor(m: f64) -> f32 {
    let f = m as f32;
    if f as f64 > m {
        f32::from_bits(f.to_bits() - 1)
    } else {
        f
    }
}

/// Range-limits, perturbs and drops depth pixels. Two draws per pixel in
/// row-major order (noise, then dropout) from stream `frame` of the seed.
pub fn corrupt_depth(depth: &DepthImage, cfg: &DepthNoiseConfig, frame: u64) -> Result<DepthImage, NoiseError> {
    cfg.validate()?;
    if cfg.is_zero() {
        return Ok(depth.clone());
    }
    let max = f32_floor(cfg.max_range);
    let noisy = cfg.sigma_a != 0.0 || cfg.sigma_b != 0.0;
    let mut g = GaussianStream::new(cfg.rng_seed, frame);
    let mut out = depth.clone();
    for z in out.data.iter_mut() {
        let n = g.standard_normal();
        let u = g.uniform();
        let zi = *z;
        if !(zi > 0.0) || !zi.is_finite() || zi as f64 > cfg.max_range {
            *z = 0.0;
            continue;
        }
        if noisy {
            let zn = zi as f64 + cfg.sigma(zi as f64) * n;
            *z = (zn as f32).clamp(MIN_DEPTH, max);
        }
        if u < cfg.dropout_prob {
            *z = 0.0;
        }
    }
    Ok(out)
}
