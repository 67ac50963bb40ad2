use super::EvalError;

#[derive(Debug, Clone, PartialEq)]
pub struct MissingTimeParams {
    /// Gaps longer than `gap_factor / nominal_rate` count as lost tracking.
    pub gap_factor: f64,
    pub sequence_start: f64,
    pub sequence_duration: f64,
    /// When false, the time before the first estimate is always credited.
    pub count_startup_delay: bool,
}

impl MissingTimeParams {
    pub fn new(sequence_start: f64, sequence_duration: f64) -> Self {
        Self {
            gap_factor: 2.0,
            sequence_start,
            sequence_duration,
            count_startup_delay: true,
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Seconds of the sequence not covered by estimate output.
///
/// Each consecutive stamp pair credits `Δt` when `Δt ≤ gap_factor/rate` and a
/// single nominal period `1/rate` otherwise, with the nominal rate the median
/// of `1/Δt`. The lead-in from the sequence start is credited only when the
/// first stamp arrives within the same bound.
pub fn missing_time(est_stamps: &[f64], p: &MissingTimeParams) -> Result<f64, EvalError> {
    if !(p.sequence_duration > 0.0) || !(p.gap_factor > 0.0) {
        return Err(EvalError::Invalid("sequence duration and gap factor must be positive".into()));
    }
    let d = p.sequence_duration;
    if est_stamps.len() < 2 {
        return Ok(d);
    }
    let dts: Vec<f64> = est_stamps.windows(2).map(|w| w[1] - w[0]).collect();
    if dts.iter().any(|dt| !(*dt > 0.0)) {
        return Err(EvalError::Invalid("estimate stamps must increase".into()));
    }
    let rate = median(dts.iter().map(|dt| 1.0 / dt).collect());
    let max_gap = p.gap_factor / rate;
    let mut tracked: f64 = dts.iter().map(|&dt| if dt <= max_gap { dt } else { 1.0 / rate }).sum();
    let lead = est_stamps[0] - p.sequence_start;
    if lead > 0.0 && (lead <= max_gap || !p.count_startup_delay) {
        tracked += lead;
    }
    Ok((d - tracked).clamp(0.0, d))
}
