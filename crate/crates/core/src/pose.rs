//! Rigid poses and the intrinsic XYZ Euler convention shared by the
//! simulator and the error metrics.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

/// Pose of the object frame relative to the camera frame.
///
/// A point with object coordinates `p` has camera coordinates
/// `rotation * p + translation`; the rows of `rotation` are the camera axes
/// expressed in object coordinates and `translation` is the camera-frame
/// position of the reference point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity(), Vector3::zeros())
    }

    pub fn transform(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Row-major rotation followed by translation.
    pub fn to_array(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t.x,
            t.y,
            t.z,
        ]
    }

    pub fn from_array(v: &[f64; 12]) -> Self {
        Self::new(Matrix3::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]), Vector3::new(v[9], v[10], v[11]))
    }

    pub fn euler_xyz_deg(&self) -> Vector3<f64> {
        euler_xyz_from_matrix(&self.rotation).map(f64::to_degrees)
    }
}

/// `Rx(a) · Ry(b) · Rz(c)`, angles in radians.
pub fn matrix_from_euler_xyz(a: f64, b: f64, c: f64) -> Matrix3<f64> {
    let rx = Rotation3::from_axis_angle(&Vector3::x_axis(), a);
    let ry = Rotation3::from_axis_angle(&Vector3::y_axis(), b);
    let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), c);
    (rx * ry * rz).into_inner()
}

/// Angles `(a, b, c)` in radians with `R = Rx(a) · Ry(b) · Rz(c)` and
/// `b ∈ [−π/2, π/2]`.
pub fn euler_xyz_from_matrix(r: &Matrix3<f64>) -> Vector3<f64> {
    let sb = r[(0, 2)].clamp(-1.0, 1.0);
    let b = sb.asin();
    if sb.abs() < 1.0 - 1e-12 {
        let a = (-r[(1, 2)]).atan2(r[(2, 2)]);
        let c = (-r[(0, 1)]).atan2(r[(0, 0)]);
        Vector3::new(a, b, c)
    } else {
        // gimbal lock: only a ± c is observable, put it all in a
        let a = r[(1, 0)].atan2(r[(1, 1)]);
        Vector3::new(a, b, 0.0)
    }
}

/// Wraps an angle in degrees to `(−180, 180]`.
pub fn wrap_deg(angle: f64) -> f64 {
    let w = angle.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}
