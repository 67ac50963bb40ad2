use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::geometry::{GeometryError, TriMesh};
use crate::pose::{interpolate_pose, Pose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformFrame {
    pub time: f64,
    pub vertices: Vec<Point3<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidKey {
    pub time: f64,
    pub pose: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Motion {
    /// Per-frame vertex positions over the base topology.
    Deforming { frames: Vec<DeformFrame> },
    /// Base mesh moved by a pose per keyframe.
    Rigid { keys: Vec<RigidKey> },
}

/// Time-varying asset geometry in its local frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimationTrack {
    pub name: String,
    pub frame_rate: f64,
    pub base: TriMesh,
    pub motion: Motion,
}

fn check_times(times: impl Iterator<Item = f64>) -> Result<(), GeometryError> {
    let mut prev: Option<f64> = None;
    for t in times {
        match prev {
            None if t != 0.0 => {
                return Err(GeometryError::InvalidParameter(format!("first keyframe at {t}, expected 0")));
            }
            Some(p) if !(t > p) => {
                return Err(GeometryError::InvalidParameter(format!("keyframe times not increasing at {t}")));
            }
            _ => {}
        }
        prev = Some(t);
    }
    prev.map(|_| ()).ok_or(GeometryError::EmptyGeometry)
}

impl AnimationTrack {
    pub fn deforming(name: impl Into<String>, frame_rate: f64, base: TriMesh, frames: Vec<DeformFrame>) -> Result<Self, GeometryError> {
        let t = Self {
            name: name.into(),
            frame_rate,
            base,
            motion: Motion::Deforming { frames },
        };
        t.validate()?;
        Ok(t)
    }

    pub fn rigid(name: impl Into<String>, frame_rate: f64, base: TriMesh, keys: Vec<RigidKey>) -> Result<Self, GeometryError> {
        let t = Self {
            name: name.into(),
            frame_rate,
            base,
            motion: Motion::Rigid { keys },
        };
        t.validate()?;
        Ok(t)
    }

    /// A track holding the base mesh still.
    pub fn still(name: impl Into<String>, base: TriMesh) -> Self {
        Self {
            name: name.into(),
            frame_rate: 1.0,
            base,
            motion: Motion::Rigid {
                keys: vec![RigidKey {
                    time: 0.0,
                    pose: Pose::identity(),
                }],
            },
        }
    }

    /// Re-checks invariants (needed after deserialization).
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.frame_rate > 0.0) {
            return Err(GeometryError::InvalidParameter(format!("frame rate {}", self.frame_rate)));
        }
        if self.base.is_empty() {
            return Err(GeometryError::EmptyGeometry);
        }
        match &self.motion {
            Motion::Deforming { frames } => {
                check_times(frames.iter().map(|f| f.time))?;
                let n = self.base.vertices().len();
                for f in frames {
                    if f.vertices.len() != n {
                        return Err(GeometryError::TopologyMismatch);
                    }
                    if let Some(i) = f.vertices.iter().position(|p| !p.coords.iter().all(|c| c.is_finite())) {
                        return Err(GeometryError::NonFinite(i));
                    }
                }
            }
            Motion::Rigid { keys } => check_times(keys.iter().map(|k| k.time))?,
        }
        Ok(())
    }

    pub fn keyframe_count(&self) -> usize {
        match &self.motion {
            Motion::Deforming { frames } => frames.len(),
            Motion::Rigid { keys } => keys.len(),
        }
    }

    /// Time of the last keyframe.
    pub fn duration(&self) -> f64 {
        match &self.motion {
            Motion::Deforming { frames } => frames.last().map_or(0.0, |f| f.time),
            Motion::Rigid { keys } => keys.last().map_or(0.0, |k| k.time),
        }
    }

    pub fn keyframe_mesh(&self, i: usize) -> TriMesh {
        match &self.motion {
            Motion::Deforming { frames } => self
                .base
                .with_vertices(frames[i].vertices.clone())
                .expect("validated topology"),
            Motion::Rigid { keys } => self.base.transformed(&keys[i].pose),
        }
    }

    fn bracket(times: &[f64], phase: f64) -> (usize, usize, f64) {
        let last = times.len() - 1;
        if phase <= times[0] {
            return (0, 0, 0.0);
        }
        if phase >= times[last] {
            return (last, last, 0.0);
        }
        let hi = times.partition_point(|&t| t <= phase);
        let lo = hi - 1;
        let u = (phase - times[lo]) / (times[hi] - times[lo]);
        (lo, hi, u)
    }

    /// Geometry at `phase ∈ [0, duration]` (clamped), interpolated between keyframes.
    pub fn sample(&self, phase: f64) -> TriMesh {
        match &self.motion {
            Motion::Deforming { frames } => {
                let times: Vec<f64> = frames.iter().map(|f| f.time).collect();
                let (lo, hi, u) = Self::bracket(&times, phase);
                if u == 0.0 {
                    return self.keyframe_mesh(lo);
                }
                let v = frames[lo]
                    .vertices
                    .iter()
                    .zip(&frames[hi].vertices)
                    .map(|(a, b)| a + (b - a) * u)
                    .collect();
                self.base.with_vertices(v).expect("validated topology")
            }
            Motion::Rigid { .. } => self.base.transformed(&self.pose_at(phase)),
        }
    }

    /// Rigid pose at `phase`; identity for deforming tracks.
    pub fn pose_at(&self, phase: f64) -> Pose {
        match &self.motion {
            Motion::Rigid { keys } => {
                let times: Vec<f64> = keys.iter().map(|k| k.time).collect();
                let (lo, hi, u) = Self::bracket(&times, phase);
                if u == 0.0 {
                    keys[lo].pose
                } else {
                    interpolate_pose(&keys[lo].pose, &keys[hi].pose, u)
                }
            }
            Motion::Deforming { .. } => Pose::identity(),
        }
    }
}
