use serde::{Deserialize, Serialize};

use crate::sensors::DepthImage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcclusionConfig {
    /// Metres.
    pub near_threshold: f64,
    /// Fraction of valid pixels closer than `near_threshold` that flags a frame.
    pub occlusion_fraction: f64,
    /// Frames with fewer valid pixels than this fraction are flagged.
    pub min_valid_fraction: f64,
}

impl Default for OcclusionConfig {
    fn default() -> Self {
        Self {
            near_threshold: 0.2,
            occlusion_fraction: 0.95,
            min_valid_fraction: 0.05,
        }
    }
}

/// True when the view is mostly blocked by something very close, or mostly invalid.
pub fn detect_occluded(depth: &DepthImage, cfg: &OcclusionConfig) -> bool {
    let total = depth.data.len();
    if total == 0 {
        return true;
    }
    let valid = depth.data.iter().filter(|&&z| z > 0.0).count();
    if (valid as f64) < cfg.min_valid_fraction * total as f64 {
        return true;
    }
    let near = depth.data.iter().filter(|&&z| z > 0.0 && (z as f64) < cfg.near_threshold).count();
    near as f64 > cfg.occlusion_fraction * valid as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mix(near: usize, far: usize) -> DepthImage {
        let mut data = vec![0.1f32; near];
        data.extend(std::iter::repeat_n(2.0f32, far));
        DepthImage {
            width: data.len() as u32,
            height: 1,
            data,
        }
    }

    #[test]
    fn thresholds() {
        let c = OcclusionConfig::default();
        assert!(!detect_occluded(&mix(0, 100), &c));
        let mut all_close = mix(0, 0);
        all_close.data = vec![0.05; 50];
        all_close.width = 50;
        assert!(detect_occluded(&all_close, &c));
        assert!(detect_occluded(&mix(96, 4), &c));
        assert!(!detect_occluded(&mix(90, 10), &c));
        assert!(detect_occluded(&DepthImage::zeros(10, 10), &c));
    }
}
