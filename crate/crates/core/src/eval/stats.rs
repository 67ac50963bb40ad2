use nalgebra::Vector6;
use serde::Serialize;

use super::EvalError;
use crate::sensors::InstanceImage;
use crate::sim::{ChannelKind, Payload, RecordLog};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceStats {
    /// m/s (x, y, z), rad/s (roll, pitch, yaw).
    pub avg_abs_speed: Vector6<f64>,
    /// m/s², rad/s².
    pub avg_abs_accel: Vector6<f64>,
    pub dynamic_frames: usize,
    pub total_frames: usize,
    /// Mean percentage of the image covered by humans over dynamic frames.
    pub covered_ratio: f64,
}

/// Order-independent mean: values are sorted first, then averaged
/// incrementally, so constant inputs come back exactly.
fn stable_mean(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let mut m = 0.0;
    for (i, x) in v.iter().enumerate() {
        m += (x - m) / (i + 1) as f64;
    }
    m
}

/// Speed and acceleration averages from `robot`'s odometry twist, plus human
/// coverage over `frames`.
pub fn sequence_stats(log: &RecordLog, robot: &str, frames: &[InstanceImage], human_ids: &[u32]) -> Result<SequenceStats, EvalError> {
    let ch = log
        .header
        .channels
        .iter()
        .find(|c| c.kind == ChannelKind::Odometry && c.robot.as_deref() == Some(robot))
        .ok_or_else(|| EvalError::MissingChannel(format!("{robot}/odometry")))?;
    let twists: Vec<Vector6<f64>> = log
        .records_on(ch.id)
        .filter_map(|r| match &r.payload {
            Payload::Odometry { twist, .. } => Some(*twist),
            _ => None,
        })
        .collect();
    if twists.is_empty() {
        return Err(EvalError::MissingChannel(format!("{robot}/odometry has no records")));
    }
    let rate = ch.rate as f64;
    let mut speed = Vector6::zeros();
    let mut accel = Vector6::zeros();
    for a in 0..6 {
        speed[a] = stable_mean(twists.iter().map(|t| t[a].abs()).collect());
        accel[a] = stable_mean(twists.windows(2).map(|w| ((w[1][a] - w[0][a]) * rate).abs()).collect());
    }
    let mut coverage = Vec::new();
    for f in frames {
        let humans = f.data.iter().filter(|id| human_ids.contains(id)).count();
        if humans > 0 {
            coverage.push(humans as f64 / f.data.len() as f64 * 100.0);
        }
    }
    Ok(SequenceStats {
        avg_abs_speed: speed,
        avg_abs_accel: accel,
        dynamic_frames: coverage.len(),
        total_frames: frames.len(),
        covered_ratio: if coverage.is_empty() { 0.0 } else { stable_mean(coverage) },
    })
}
