use nalgebra::Vector3;

use super::trajectory::Trajectory;
use super::EvalError;
use crate::pose::Pose;

/// Nearest-neighbour stamp association tolerance, seconds.
pub const DEFAULT_MAX_ASSOC_DT: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct AteResult {
    pub rmse: f64,
    pub matched_pairs: usize,
    /// `gt_i − T·est_i` translations per matched pair, in est order.
    pub residuals: Vec<Vector3<f64>>,
    /// The first-pose alignment `gt_first ∘ est_first⁻¹`.
    pub alignment: Pose,
}

/// `(gt index, est index)` pairs: each est stamp takes its nearest gt stamp
/// within `max_dt` (earlier gt stamp on exact ties).
pub fn associate(gt: &Trajectory, est: &Trajectory, max_dt: f64) -> Vec<(usize, usize)> {
    let g = gt.stamps();
    let mut out = Vec::new();
    for (j, (t, _)) in est.samples().iter().enumerate() {
        let k = g.partition_point(|&s| s < *t);
        let mut best: Option<(f64, usize)> = None;
        for i in [k.wrapping_sub(1), k] {
            if let Some(&s) = g.get(i) {
                let d = (s - t).abs();
                if d <= max_dt && best.is_none_or(|b| d < b.0) {
                    best = Some((d, i));
                }
            }
        }
        if let Some((_, i)) = best {
            out.push((i, j));
        }
    }
    out
}

/// RMSE of translation residuals after aligning the first matched est pose
/// onto its ground-truth pose. No scale, no trajectory-wide fit.
pub fn ate_rmse(gt: &Trajectory, est: &Trajectory, max_assoc_dt: f64) -> Result<AteResult, EvalError> {
    if est.is_empty() {
        return Err(EvalError::Association("empty estimate".into()));
    }
    let pairs = associate(gt, est, max_assoc_dt);
    let Some(&(g0, e0)) = pairs.first() else {
        return Err(EvalError::Association(format!("no estimate stamp within {max_assoc_dt} s of ground truth")));
    };
    let alignment = gt.samples()[g0].1 * est.samples()[e0].1.inverse();
    let residuals: Vec<Vector3<f64>> = pairs
        .iter()
        .map(|&(i, j)| gt.samples()[i].1.translation.vector - (alignment * est.samples()[j].1).translation.vector)
        .collect();
    let sq = residuals.iter().map(|r| r.norm_squared()).sum::<f64>();
    Ok(AteResult {
        rmse: (sq / residuals.len() as f64).sqrt(),
        matched_pairs: residuals.len(),
        residuals,
        alignment,
    })
}
