use nalgebra::{Quaternion, Translation3, UnitQuaternion};
use std::fmt::Write as _;

use super::EvalError;
use crate::pose::Pose;
use crate::sim::{Payload, RecordLog};

/// Timed poses with strictly increasing stamps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<(f64, Pose)>,
}

const UNIT_TOL: f64 = 1e-6;

impl Trajectory {
    pub fn new(samples: Vec<(f64, Pose)>) -> Result<Self, EvalError> {
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(EvalError::Invalid(format!("stamp {} does not increase (pose {})", w[1].0, i + 1)));
            }
        }
        if let Some((i, _)) = samples.iter().enumerate().find(|(_, s)| !s.0.is_finite() || (s.1.rotation.quaternion().norm() - 1.0).abs() > UNIT_TOL) {
            return Err(EvalError::Invalid(format!("pose {i} has a bad stamp or rotation")));
        }
        Ok(Self { samples })
    }

    pub fn empty() -> Self {
        Self { samples: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(f64, Pose)] {
        &self.samples
    }

    pub fn stamps(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    /// Every pose pre-multiplied by `t`.
    pub fn transformed(&self, t: &Pose) -> Self {
        Self {
            samples: self.samples.iter().map(|(s, p)| (*s, t * p)).collect(),
        }
    }

    /// `timestamp tx ty tz qx qy qz qw` lines; `#` comments and blank lines skipped.
    /// Quaternions are normalized on load.
    pub fn parse_tum(text: &str) -> Result<Self, EvalError> {
        let mut samples = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| EvalError::Parse { line: n + 1, msg: format!("{e}") })?;
            if v.len() != 8 || !v.iter().all(|x| x.is_finite()) {
                return Err(EvalError::Parse {
                    line: n + 1,
                    msg: "expected 8 finite numbers".into(),
                });
            }
            let q = Quaternion::new(v[7], v[4], v[5], v[6]);
            if q.norm() < 1e-9 {
                return Err(EvalError::Parse { line: n + 1, msg: "zero quaternion".into() });
            }
            samples.push((v[0], Pose::from_parts(Translation3::new(v[1], v[2], v[3]), UnitQuaternion::from_quaternion(q))));
        }
        Self::new(samples)
    }

    /// TUM text with shortest round-trip number formatting.
    pub fn to_tum(&self) -> String {
        let mut s = String::new();
        for (t, p) in &self.samples {
            let x = p.translation.vector;
            let q = p.rotation.quaternion();
            writeln!(s, "{t} {} {} {} {} {} {} {}", x.x, x.y, x.z, q.i, q.j, q.k, q.w).unwrap();
        }
        s
    }

    /// Camera (optical frame) trajectory of `robot` from its camera_pose channel.
    pub fn from_log(log: &RecordLog, robot: &str) -> Result<Self, EvalError> {
        let name = format!("{robot}/camera_pose");
        let ch = log.header.channel_by_name(&name).ok_or_else(|| EvalError::MissingChannel(name.clone()))?;
        let samples = log
            .records_on(ch.id)
            .filter_map(|r| match &r.payload {
                Payload::CameraPose { pose } => Some((r.sim_time, *pose)),
                _ => None,
            })
            .collect();
        Self::new(samples)
    }
}
