use nalgebra::Vector6;
use serde::{Deserialize, Serialize};

use super::limits::RobotState;
use super::ControlError;
use crate::pose::{wrap_2pi, wrap_pi};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetpointKind {
    Position,
    Velocity,
}

/// Joint-space target. Angles in radians (rad/s for velocity setpoints).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setpoint {
    pub kind: SetpointKind,
    pub value: Vector6<f64>,
    pub stamp: f64,
}

/// Anything that can produce a setpoint for the current time.
pub trait SetpointSource {
    fn setpoint(&mut self, t: f64, state: &RobotState) -> Setpoint;

    /// Pose the robot should start from, if the source dictates one.
    fn initial_joints(&self) -> Option<Vector6<f64>> {
        None
    }
}

/// Timed joint waypoints, angles stored in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointScript {
    pub points: Vec<(f64, Vector6<f64>)>,
}

fn parse_fields(line: &str, n: usize, lineno: usize) -> Result<Vec<f64>, ControlError> {
    let f: Vec<f64> = line
        .split_whitespace()
        .take(n)
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|e| ControlError::Parse {
            line: lineno,
            msg: format!("{e}"),
        })?;
    if f.len() != n || !f.iter().all(|v| v.is_finite()) {
        return Err(ControlError::Parse {
            line: lineno,
            msg: format!("expected {n} finite numbers"),
        });
    }
    Ok(f)
}

fn joints_from_degrees(f: &[f64]) -> Vector6<f64> {
    Vector6::new(f[0], f[1], f[2], f[3].to_radians(), f[4].to_radians(), f[5].to_radians())
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

impl WaypointScript {
    pub fn new(points: Vec<(f64, Vector6<f64>)>) -> Result<Self, ControlError> {
        if points.is_empty() {
            return Err(ControlError::InvalidParameter("empty waypoint script".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(ControlError::InvalidParameter("waypoint times must increase".into()));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.iter().all(|x| x.is_finite())) {
            return Err(ControlError::NonFinite("waypoint"));
        }
        Ok(Self { points })
    }

    /// Parses `t x y z roll pitch yaw` lines (seconds, metres, degrees); `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ControlError> {
        let mut points = Vec::new();
        for (n, line) in content_lines(text) {
            if line.split_whitespace().count() != 7 {
                return Err(ControlError::Parse {
                    line: n,
                    msg: "expected `t x y z roll pitch yaw`".into(),
                });
            }
            let f = parse_fields(line, 7, n)?;
            points.push((f[0], joints_from_degrees(&f[1..])));
        }
        Self::new(points)
    }
}

/// Position setpoint interpolated from the script at time `t`.
///
/// Linear between bracketing waypoints, yaw along the shortest arc; the first
/// and last waypoints are held outside the script's time span.
pub fn waypoint_setpoint(script: &WaypointScript, t: f64) -> Setpoint {
    let p = &script.points;
    let hold = |v: Vector6<f64>| {
        let mut v = v;
        v[5] = wrap_2pi(v[5]);
        Setpoint {
            kind: SetpointKind::Position,
            value: v,
            stamp: t,
        }
    };
    if t <= p[0].0 {
        return hold(p[0].1);
    }
    if t >= p[p.len() - 1].0 {
        return hold(p[p.len() - 1].1);
    }
    let hi = p.partition_point(|(pt, _)| *pt <= t);
    let (t0, a) = p[hi - 1];
    let (t1, b) = p[hi];
    let u = (t - t0) / (t1 - t0);
    let mut v = a + (b - a) * u;
    v[5] = a[5] + wrap_pi(b[5] - a[5]) * u;
    hold(v)
}

impl SetpointSource for WaypointScript {
    fn setpoint(&mut self, t: f64, _state: &RobotState) -> Setpoint {
        waypoint_setpoint(self, t)
    }

    fn initial_joints(&self) -> Option<Vector6<f64>> {
        self.points.first().map(|p| p.1)
    }
}

/// Holds the pose the robot had at its first query.
#[derive(Debug, Clone, Default)]
pub struct HoldSource {
    target: Option<Vector6<f64>>,
}

impl SetpointSource for HoldSource {
    fn setpoint(&mut self, t: f64, state: &RobotState) -> Setpoint {
        let value = *self.target.get_or_insert(state.joint_pos);
        Setpoint {
            kind: SetpointKind::Position,
            value,
            stamp: t,
        }
    }
}

/// Pre-recorded setpoints; the latest one stamped at or before `t` is active.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSource {
    records: Vec<Setpoint>,
}

impl StreamSource {
    pub fn new(records: Vec<Setpoint>) -> Result<Self, ControlError> {
        if records.windows(2).any(|w| w[1].stamp < w[0].stamp) {
            return Err(ControlError::InvalidParameter("setpoint stamps must not decrease".into()));
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[Setpoint] {
        &self.records
    }
}

impl SetpointSource for StreamSource {
    fn setpoint(&mut self, t: f64, state: &RobotState) -> Setpoint {
        let k = self.records.partition_point(|s| s.stamp <= t);
        match k.checked_sub(1).map(|i| self.records[i]).or_else(|| self.records.first().copied()) {
            Some(s) => s,
            None => Setpoint {
                kind: SetpointKind::Position,
                value: state.joint_pos,
                stamp: t,
            },
        }
    }
}

/// Parses `t x y z roll pitch yaw kind` records, `kind` ∈ {position, velocity}.
///
/// Angles are degrees (deg/s for velocity records).
pub fn parse_setpoint_stream(text: &str) -> Result<StreamSource, ControlError> {
    let mut out = Vec::new();
    for (n, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 8 {
            return Err(ControlError::Parse {
                line: n,
                msg: "expected `t x y z roll pitch yaw kind`".into(),
            });
        }
        let kind = match toks[7] {
            "position" => SetpointKind::Position,
            "velocity" => SetpointKind::Velocity,
            other => {
                return Err(ControlError::Parse {
                    line: n,
                    msg: format!("unknown kind {other:?}"),
                })
            }
        };
        let f = parse_fields(line, 7, n)?;
        out.push(Setpoint {
            kind,
            value: joints_from_degrees(&f[1..]),
            stamp: f[0],
        });
    }
    StreamSource::new(out)
}
