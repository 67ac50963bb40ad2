//! Six-joint virtual robot: state, limits, PID velocity controller and
//! setpoint sources.

mod limits;
mod pid;
mod setpoints;

pub use limits::{JointLimits, RobotState};
pub use pid::{integrate_robot, pid_step, PidController, PidGains};
pub use setpoints::{
    parse_setpoint_stream, waypoint_setpoint, HoldSource, Setpoint, SetpointKind, SetpointSource, StreamSource, WaypointScript,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
