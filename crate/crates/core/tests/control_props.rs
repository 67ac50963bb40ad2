use std::f64::consts::TAU;

use nalgebra::{Vector3, Vector6};
use proptest::prelude::*;

use grade_forge::control::{integrate_robot, pid_step, JointLimits, PidController, PidGains, RobotState, Setpoint, SetpointKind};

const DT: f64 = 1.0 / 240.0;

fn within(s: &RobotState, l: &JointLimits) -> bool {
    let (v, p) = (s.joint_vel, s.joint_pos);
    (0..3).all(|i| v[i].abs() <= l.vel_xyz && p[i] >= l.pos_min[i] && p[i] <= l.pos_max[i])
        && (3..5).all(|i| v[i].abs() <= l.vel_rollpitch && p[i].abs() <= l.rollpitch_max)
        && v[5].abs() <= l.vel_yaw
        && (0.0..TAU).contains(&p[5])
}

fn kind(velocity: bool) -> SetpointKind {
    if velocity {
        SetpointKind::Velocity
    } else {
        SetpointKind::Position
    }
}

fn any_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => -1e3f64..1e3,
        1 => Just(f64::NAN),
        1 => Just(f64::INFINITY),
        1 => Just(f64::NEG_INFINITY),
        1 => Just(1e300),
    ]
}

fn finite_value() -> impl Strategy<Value = f64> {
    prop_oneof![8 => -1e3f64..1e3, 1 => Just(1e300), 1 => Just(-1e300)]
}

fn run(gains: PidGains, limits: &JointLimits, start: Vector6<f64>, sps: &[(bool, [f64; 6])], steps: usize) -> Vec<RobotState> {
    let mut ctrl = PidController::new(gains);
    let mut s = RobotState::at_rest(start, 0.0);
    let mut out = Vec::new();
    for k in 0..steps {
        let (vel, v) = sps[k * sps.len() / steps];
        let sp = Setpoint {
            kind: kind(vel),
            value: Vector6::from_row_slice(&v),
            stamp: s.time,
        };
        let cmd = pid_step(&mut ctrl, &s, &sp, limits, DT).unwrap();
        s = integrate_robot(&s, &cmd, limits, DT);
        out.push(s);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn limits_hold_for_any_commands(
        stabilized in any::<bool>(),
        gains in (0.0f64..50.0, 0.0f64..10.0, 0.0f64..5.0, 0.0f64..10.0),
        sps in prop::collection::vec((any::<bool>(), prop::array::uniform6(finite_value())), 1..6),
        raw in prop::collection::vec(prop::array::uniform6(any_value()), 1..50),
    ) {
        let limits = JointLimits::new(Vector3::new(-2.0, -1.0, 0.0), Vector3::new(3.0, 2.0, 2.5), stabilized);
        let start = Vector6::new(0.5, 0.5, 1.0, 0.0, 0.0, 1.0);
        for s in run(PidGains::uniform(gains.0, gains.1, gains.2, gains.3), &limits, start, &sps, 300) {
            prop_assert!(within(&s, &limits), "{:?}", s);
        }
        let mut s = RobotState::at_rest(start, 0.0);
        let mut ctrl = PidController::new(PidGains::default());
        for c in &raw {
            let sp = Setpoint { kind: SetpointKind::Position, value: Vector6::from_row_slice(c), stamp: 0.0 };
            let finite = c.iter().all(|v| v.is_finite());
            prop_assert_eq!(pid_step(&mut ctrl, &s, &sp, &limits, DT).is_ok(), finite);
        }
        for c in raw {
            s = integrate_robot(&s, &Vector6::from_row_slice(&c), &limits, DT);
            prop_assert!(within(&s, &limits), "{:?}", s);
        }
    }

    #[test]
    fn controller_is_deterministic(
        sps in prop::collection::vec((any::<bool>(), prop::array::uniform6(-5.0f64..5.0)), 1..5),
    ) {
        let limits = JointLimits::new(Vector3::new(-5.0, -5.0, 0.0), Vector3::new(5.0, 5.0, 3.0), false);
        let start = Vector6::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0);
        let a = run(PidGains::default(), &limits, start, &sps, 500);
        let b = run(PidGains::default(), &limits, start, &sps, 500);
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn velocity_setpoints_are_tracked(
        lin in prop::array::uniform3(-0.5f64..0.5),
        yaw_rate in -0.5f64..0.5,
        stabilized in any::<bool>(),
    ) {
        let limits = JointLimits::new(Vector3::new(-100.0, -100.0, -100.0), Vector3::new(100.0, 100.0, 100.0), stabilized);
        let sp = [lin[0], lin[1], lin[2], 0.0, 0.0, yaw_rate];
        let states = run(PidGains::default(), &limits, Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0), &[(true, sp)], 2400);
        let v = states.last().unwrap().joint_vel;
        for i in 0..6 {
            prop_assert!((v[i] - sp[i]).abs() < 1e-3, "axis {}: {} vs {}", i, v[i], sp[i]);
        }
    }
}
