use nalgebra::{Matrix3, Point2, Point3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::SensorError;
use crate::geometry::Ray;
use crate::pose::Pose;

/// Pinhole intrinsics. Depth beyond `max_range` (z-depth) counts as no hit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Unbounded when absent (serialized as null).
    #[serde(default = "unbounded", with = "range_serde")]
    pub max_range: f64,
}

fn unbounded() -> f64 {
    f64::INFINITY
}

pub(crate) mod range_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Aspect ratio whose vertical FOV is shared by every camera.
const REFERENCE_ASPECT: f64 = 4.0 / 3.0;

impl CameraIntrinsics {
    /// Intrinsics with the given horizontal FOV and the vertical FOV of a 4:3
    /// camera, so cameras of any resolution share both FOVs.
    pub fn from_hfov(width: u32, height: u32, hfov_deg: f64) -> Self {
        let tan_h = (hfov_deg.to_radians() * 0.5).tan();
        let tan_v = tan_h / REFERENCE_ASPECT;
        Self {
            width,
            height,
            fx: width as f64 * 0.5 / tan_h,
            fy: height as f64 * 0.5 / tan_v,
            cx: width as f64 * 0.5,
            cy: height as f64 * 0.5,
            max_range: f64::INFINITY,
        }
    }

    /// 640×480, 90° horizontal FOV.
    pub fn low_res() -> Self {
        Self::from_hfov(640, 480, 90.0)
    }

    /// 1920×1080 with the same FOV as [`CameraIntrinsics::low_res`].
    pub fn high_res() -> Self {
        Self::from_hfov(1920, 1080, 90.0)
    }

    pub fn validate(&self) -> Result<(), SensorError> {
        let ok = self.width > 0
            && self.height > 0
            && self.fx > 0.0
            && self.fy > 0.0
            && self.fx.is_finite()
            && self.fy.is_finite()
            && self.cx >= 0.0
            && self.cx < self.width as f64
            && self.cy >= 0.0
            && self.cy < self.height as f64
            && self.max_range > 0.0;
        if ok {
            Ok(())
        } else {
            Err(SensorError::InvalidIntrinsics(format!("{self:?}")))
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Camera-frame direction through the centre of pixel `(u, v)`, with unit z
    /// so the ray parameter equals z-depth.
    pub fn pixel_direction(&self, u: u32, v: u32) -> Vector3<f64> {
        Vector3::new((u as f64 + 0.5 - self.cx) / self.fx, (v as f64 + 0.5 - self.cy) / self.fy, 1.0)
    }

    pub fn pixel_ray(&self, cam_pose: &Pose, u: u32, v: u32) -> Ray {
        Ray {
            origin: Point3::from(cam_pose.translation.vector),
            dir: cam_pose.rotation * self.pixel_direction(u, v),
        }
    }

    /// Continuous image coordinates of a camera-frame point in front of the camera.
    pub fn project(&self, p_cam: &Point3<f64>) -> Option<Point2<f64>> {
        (p_cam.z > 0.0).then(|| Point2::new(self.fx * p_cam.x / p_cam.z + self.cx, self.fy * p_cam.y / p_cam.z + self.cy))
    }
}

/// Rotation from the body frame (x forward, y left, z up) to the optical
/// frame (x right, y down, z forward).
pub fn body_to_optical() -> UnitQuaternion<f64> {
    let m = Matrix3::from_columns(&[Vector3::new(0.0, -1.0, 0.0), Vector3::new(0.0, 0.0, -1.0), Vector3::new(1.0, 0.0, 0.0)]);
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m))
}

/// World pose of the optical frame for a body pose and body-to-camera extrinsic.
pub fn camera_pose(body: &Pose, extrinsic: &Pose) -> Pose {
    body * extrinsic * Pose::from_parts(Default::default(), body_to_optical())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_fov() {
        let a = CameraIntrinsics::low_res();
        let b = CameraIntrinsics::high_res();
        assert!((a.fx / a.width as f64 - b.fx / b.width as f64).abs() < 1e-12);
        assert!((a.fy / a.height as f64 - b.fy / b.height as f64).abs() < 1e-12);
        assert!((a.fx - 320.0).abs() < 1e-9);
        a.validate().unwrap();
        b.validate().unwrap();
    }

    #[test]
    fn optical_axes() {
        let q = body_to_optical();
        assert!((q * Vector3::z() - Vector3::x()).norm() < 1e-12);
        assert!((q * Vector3::x() + Vector3::y()).norm() < 1e-12);
        assert!((q * Vector3::y() + Vector3::z()).norm() < 1e-12);
    }

    #[test]
    fn project_inverts_pixel_direction() {
        let k = CameraIntrinsics::low_res();
        let d = k.pixel_direction(17, 401);
        let p = k.project(&Point3::from(d * 3.0)).unwrap();
        assert!((p.x - 17.5).abs() < 1e-9 && (p.y - 401.5).abs() < 1e-9);
    }

    #[test]
    fn unbounded_range_serializes() {
        let k = CameraIntrinsics::low_res();
        let s = serde_json::to_string(&k).unwrap();
        assert!(s.contains("\"max_range\":null"));
        assert_eq!(serde_json::from_str::<CameraIntrinsics>(&s).unwrap(), k);
    }

    #[test]
    fn rejects_bad_intrinsics() {
        let mut k = CameraIntrinsics::low_res();
        k.cx = 640.0;
        assert!(k.validate().is_err());
    }
}
