use serde::Serialize;
use std::fmt::Write as _;

use super::stats::SequenceStats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub sequence: String,
    pub ate_rmse: f64,
    pub missing_time: f64,
    pub matched_pairs: usize,
    /// Percent of the sequence with estimate output.
    pub tracked_fraction: f64,
}

impl EvalReport {
    pub fn new(sequence: impl Into<String>, ate_rmse: f64, missing_time: f64, matched_pairs: usize, duration: f64) -> Self {
        Self {
            sequence: sequence.into(),
            ate_rmse,
            missing_time,
            matched_pairs,
            tracked_fraction: if duration > 0.0 { (duration - missing_time) / duration * 100.0 } else { 0.0 },
        }
    }
}

pub fn eval_table(reports: &[EvalReport]) -> String {
    let mut s = String::from("sequence              ATE [m]  missing [s]  pairs  tracked [%]\n");
    for r in reports {
        writeln!(s, "{:<20} {:>8.3} {:>12.2} {:>6} {:>12.1}", r.sequence, r.ate_rmse, r.missing_time, r.matched_pairs, r.tracked_fraction).unwrap();
    }
    s
}

pub fn eval_csv(reports: &[EvalReport]) -> String {
    let mut s = String::from("sequence,ate_rmse_m,missing_time_s,matched_pairs,tracked_fraction_pct\n");
    for r in reports {
        writeln!(s, "{},{},{},{},{}", r.sequence, r.ate_rmse, r.missing_time, r.matched_pairs, r.tracked_fraction).unwrap();
    }
    s
}

const AXES: [&str; 6] = ["x", "y", "z", "roll", "pitch", "yaw"];

pub fn stats_text(name: &str, s: &SequenceStats) -> String {
    let mut out = format!("sequence {name}\n");
    for (i, a) in AXES.iter().enumerate() {
        let (vu, au) = if i < 3 { ("m/s", "m/s^2") } else { ("rad/s", "rad/s^2") };
        writeln!(out, "  {a:<5} avg |speed| {:.4} {vu:<5}  avg |accel| {:.4} {au}", s.avg_abs_speed[i], s.avg_abs_accel[i]).unwrap();
    }
    writeln!(out, "  dynamic frames {} of {}", s.dynamic_frames, s.total_frames).unwrap();
    writeln!(out, "  covered ratio {:.2} %*", s.covered_ratio).unwrap();
    out.push_str("  * mean percentage of image pixels showing humans, over dynamic frames\n");
    out
}

pub fn stats_csv(name: &str, s: &SequenceStats) -> String {
    let mut head = String::from("sequence");
    let mut row = name.to_string();
    for a in AXES {
        write!(head, ",speed_{a}").unwrap();
    }
    for a in AXES {
        write!(head, ",accel_{a}").unwrap();
    }
    for v in s.avg_abs_speed.iter().chain(s.avg_abs_accel.iter()) {
        write!(row, ",{v}").unwrap();
    }
    format!("{head},dynamic_frames,total_frames,covered_ratio_pct\n{row},{},{},{}\n", s.dynamic_frames, s.total_frames, s.covered_ratio)
}
