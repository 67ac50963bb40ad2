//! Procedural stand-ins for animated human meshes.

use nalgebra::{Point3, Vector3};
use std::f64::consts::TAU;

use super::track::{AnimationTrack, DeformFrame};
use crate::geometry::shapes::ellipsoid;
use crate::geometry::SemanticLabel;

const PROXY_FPS: f64 = 30.0;
const SOLE_CLEARANCE: f64 = 0.01;

/// An ellipsoid "walker" that moves `walk_distance` metres along local +x
/// over `frames` frames at 30 fps, swaying and bobbing as it goes.
///
/// Local frame: soles 1 cm above z = 0 so a walker standing on a floor does
/// not register floor contacts; body centred on the origin at frame 0.
pub fn walking_proxy(name: &str, frames: usize, walk_distance: f64, height: f64, instance_id: u32) -> AnimationTrack {
    let frames = frames.max(1);
    let radii = Vector3::new(0.22, 0.18, height * 0.5);
    let base = ellipsoid(Point3::new(0.0, 0.0, SOLE_CLEARANCE + height * 0.5), radii, 6, 10).with_instance(instance_id, SemanticLabel::Human);
    let steps = (frames - 1).max(1) as f64;
    let keyframes = (0..frames)
        .map(|f| {
            let u = f as f64 / steps;
            let gait = (TAU * 2.0 * u).sin();
            let dx = walk_distance * u;
            let stretch = 1.0 + 0.15 * gait.abs();
            let bob = 0.02 * gait;
            let sway = 0.03 * (TAU * u).sin();
            let vertices = base
                .vertices()
                .iter()
                .map(|p| Point3::new(p.x * stretch + dx, p.y + sway, SOLE_CLEARANCE + (p.z - SOLE_CLEARANCE) * (1.0 + bob)))
                .collect();
            DeformFrame {
                time: f as f64 / PROXY_FPS,
                vertices,
            }
        })
        .collect();
    AnimationTrack::deforming(name, PROXY_FPS, base, keyframes).expect("proxy walker is well formed")
}
