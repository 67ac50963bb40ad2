use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use nalgebra::{Quaternion, Translation3, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use std::io::{Cursor, Read};

use super::channels::ChannelKind;
use super::SimError;
use crate::pose::Pose;
use crate::sensors::ImuSample;

/// Animation phase and world pose of one asset at a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssetState {
    pub instance_id: u32,
    pub phase: f64,
    pub pose: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Start { seed: u64, robots: u32 },
    Clock { time: f64 },
    Imu(ImuSample),
    Tf { body: Pose, camera: Pose, assets: Vec<AssetState> },
    JointState { position: Vector6<f64>, velocity: Vector6<f64> },
    CameraPose { pose: Pose },
    Odometry { pose: Pose, twist: Vector6<f64> },
    /// Image frame; `digest` is the SHA-256 of the rendered image bytes.
    Frame { frame: u64, digest: Option<[u8; 32]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub channel: u16,
    pub index: u64,
    pub sim_time: f64,
    pub payload: Payload,
}

fn put_pose(out: &mut Vec<u8>, p: &Pose) {
    let t = p.translation.vector;
    let q = p.rotation.quaternion().coords;
    for v in t.iter().chain(q.iter()) {
        out.write_f64::<LE>(*v).unwrap();
    }
}

fn put_vec<'a>(out: &mut Vec<u8>, vals: impl IntoIterator<Item = &'a f64>) {
    for v in vals {
        out.write_f64::<LE>(*v).unwrap();
    }
}

impl Payload {
    pub fn kind_matches(&self, kind: ChannelKind) -> bool {
        matches!(
            (self, kind),
            (Payload::Start { .. }, ChannelKind::StartExperiment)
                | (Payload::Clock { .. }, ChannelKind::Clock)
                | (Payload::Imu(_), ChannelKind::ImuBody | ChannelKind::ImuCamera)
                | (Payload::Tf { .. }, ChannelKind::Tf)
                | (Payload::JointState { .. }, ChannelKind::JointState)
                | (Payload::CameraPose { .. }, ChannelKind::CameraPose)
                | (Payload::Odometry { .. }, ChannelKind::Odometry)
                | (Payload::Frame { .. }, ChannelKind::Rgb | ChannelKind::Depth)
        )
    }

    pub fn encode(&self, out: &mut Vec<u8>) {
        match self {
            Payload::Start { seed, robots } => {
                out.write_u64::<LE>(*seed).unwrap();
                out.write_u32::<LE>(*robots).unwrap();
            }
            Payload::Clock { time } => out.write_f64::<LE>(*time).unwrap(),
            Payload::Imu(s) => {
                put_vec(out, s.angular_velocity.iter());
                put_vec(out, s.linear_acceleration.iter());
                out.write_f64::<LE>(s.stamp).unwrap();
            }
            Payload::Tf { body, camera, assets } => {
                put_pose(out, body);
                put_pose(out, camera);
                out.write_u32::<LE>(assets.len() as u32).unwrap();
                for a in assets {
                    out.write_u32::<LE>(a.instance_id).unwrap();
                    out.write_f64::<LE>(a.phase).unwrap();
                    put_pose(out, &a.pose);
                }
            }
            Payload::JointState { position, velocity } => {
                put_vec(out, position.iter());
                put_vec(out, velocity.iter());
            }
            Payload::CameraPose { pose } => put_pose(out, pose),
            Payload::Odometry { pose, twist } => {
                put_pose(out, pose);
                put_vec(out, twist.iter());
            }
            Payload::Frame { frame, digest } => {
                out.write_u64::<LE>(*frame).unwrap();
                match digest {
                    Some(d) => {
                        out.push(1);
                        out.extend_from_slice(d);
                    }
                    None => out.push(0),
                }
            }
        }
    }

    pub fn decode(kind: ChannelKind, bytes: &[u8]) -> Result<Payload, SimError> {
        let mut c = Cursor::new(bytes);
        let p = decode_inner(kind, &mut c).map_err(|e| SimError::Log(format!("bad {} payload: {e}", kind.name())))?;
        if c.position() as usize != bytes.len() {
            return Err(SimError::Log(format!("trailing bytes in {} payload", kind.name())));
        }
        Ok(p)
    }
}

fn get_f64s<const N: usize>(c: &mut Cursor<&[u8]>) -> std::io::Result<[f64; N]> {
    let mut a = [0.0; N];
    for v in &mut a {
        *v = c.read_f64::<LE>()?;
    }
    Ok(a)
}

fn get_pose(c: &mut Cursor<&[u8]>) -> std::io::Result<Pose> {
    let [x, y, z, qi, qj, qk, qw] = get_f64s::<7>(c)?;
    Ok(Pose::from_parts(
        Translation3::new(x, y, z),
        UnitQuaternion::new_unchecked(Quaternion::new(qw, qi, qj, qk)),
    ))
}

fn decode_inner(kind: ChannelKind, c: &mut Cursor<&[u8]>) -> std::io::Result<Payload> {
    Ok(match kind {
        ChannelKind::StartExperiment => Payload::Start {
            seed: c.read_u64::<LE>()?,
            robots: c.read_u32::<LE>()?,
        },
        ChannelKind::Clock => Payload::Clock { time: c.read_f64::<LE>()? },
        ChannelKind::ImuBody | ChannelKind::ImuCamera => {
            let g = get_f64s::<3>(c)?;
            let a = get_f64s::<3>(c)?;
            Payload::Imu(ImuSample {
                angular_velocity: Vector3::from(g),
                linear_acceleration: Vector3::from(a),
                stamp: c.read_f64::<LE>()?,
            })
        }
        ChannelKind::Tf => {
            let body = get_pose(c)?;
            let camera = get_pose(c)?;
            let n = c.read_u32::<LE>()? as usize;
            let remaining = c.get_ref().len() - c.position() as usize;
            if n.saturating_mul(68) > remaining {
                return Err(std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "asset count exceeds payload"));
            }
            let mut assets = Vec::with_capacity(n);
            for _ in 0..n {
                assets.push(AssetState {
                    instance_id: c.read_u32::<LE>()?,
                    phase: c.read_f64::<LE>()?,
                    pose: get_pose(c)?,
                });
            }
            Payload::Tf { body, camera, assets }
        }
        ChannelKind::JointState => Payload::JointState {
            position: Vector6::from(get_f64s::<6>(c)?),
            velocity: Vector6::from(get_f64s::<6>(c)?),
        },
        ChannelKind::CameraPose => Payload::CameraPose { pose: get_pose(c)? },
        ChannelKind::Odometry => Payload::Odometry {
            pose: get_pose(c)?,
            twist: Vector6::from(get_f64s::<6>(c)?),
        },
        ChannelKind::Rgb | ChannelKind::Depth => {
            let frame = c.read_u64::<LE>()?;
            let digest = match c.read_u8()? {
                0 => None,
                1 => {
                    let mut d = [0u8; 32];
                    c.read_exact(&mut d)?;
                    Some(d)
                }
                _ => return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "bad digest flag")),
            };
            Payload::Frame { frame, digest }
        }
    })
}
