//! Radially symmetric projection models.
//!
//! Every supported lens maps the incident angle `θ` between a line of sight and
//! the optical axis to an image radius `r = r_j(θ)` measured from the principal
//! point. The azimuth of the image point equals the azimuth of the ray.
//!
//! | model         | `r(θ)`          | `g(θ)`          |
//! |---------------|-----------------|-----------------|
//! | perspective   | `f tan θ`       | `cos θ`         |
//! | stereographic | `2f tan(θ/2)`   | `cos²(θ/2)`     |
//! | equidistance  | `f θ`           | `sin θ / θ`     |
//! | equisolid     | `2f sin(θ/2)`   | `cos(θ/2)`      |
//! | orthogonal    | `f sin θ`       | `1`             |
//!
//! `g` is chosen so that `g(θ) · r(θ) / f = sin θ` for every model, and the
//! ratio of a model's radius to the pinhole radius is `G(θ) = cos θ / g(θ)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Radii that overshoot a model's maximum by less than this fraction of `f`
/// are clamped onto the boundary.
pub const RADIUS_CLAMP_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("incident angle {theta} rad is outside the domain of the {model} model")]
    AngleOutOfRange { model: CameraModel, theta: f64 },
    #[error("image radius {r} px exceeds the maximum {max} px of the {model} model")]
    RadiusOutOfRange { model: CameraModel, r: f64, max: f64 },
    #[error("point lies on or behind the image plane (z = {z})")]
    BehindCamera { z: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CameraModel {
    Perspective,
    Stereographic,
    Equidistance,
    Equisolid,
    Orthogonal,
}

impl CameraModel {
    pub const ALL: [CameraModel; 5] = [
        CameraModel::Perspective,
        CameraModel::Stereographic,
        CameraModel::Equidistance,
        CameraModel::Equisolid,
        CameraModel::Orthogonal,
    ];

    pub const FISHEYE: [CameraModel; 4] =
        [CameraModel::Stereographic, CameraModel::Equidistance, CameraModel::Equisolid, CameraModel::Orthogonal];

    pub fn name(self) -> &'static str {
        match self {
            CameraModel::Perspective => "perspective",
            CameraModel::Stereographic => "stereographic",
            CameraModel::Equidistance => "equidistance",
            CameraModel::Equisolid => "equisolid",
            CameraModel::Orthogonal => "orthogonal",
        }
    }

    pub fn is_fisheye(self) -> bool {
        self != CameraModel::Perspective
    }

    /// Largest incident angle the model can image, and whether that angle
    /// itself is admissible.
    fn angle_limit(self) -> (f64, bool) {
        match self {
            CameraModel::Perspective => (FRAC_PI_2, false),
            CameraModel::Stereographic => (PI, false),
            CameraModel::Equidistance | CameraModel::Equisolid => (PI, true),
            CameraModel::Orthogonal => (FRAC_PI_2, true),
        }
    }

    /// Largest image radius the model produces, in units of `f`.
    fn radius_limit(self) -> f64 {
        match self {
            CameraModel::Perspective | CameraModel::Stereographic => f64::INFINITY,
            CameraModel::Equidistance => PI,
            CameraModel::Equisolid => 2.0,
            CameraModel::Orthogonal => 1.0,
        }
    }

    /// Image radius in pixels of a ray at incident angle `theta`.
    pub fn radial_distance(self, theta: f64, f: f64) -> Result<f64, DomainError> {
        if !theta.is_finite() {
            return Err(DomainError::NonFinite("incident angle"));
        }
        let (limit, inclusive) = self.angle_limit();
        let inside = if inclusive { theta <= limit } else { theta < limit };
        if theta < 0.0 || !inside {
            return Err(DomainError::AngleOutOfRange { model: self, theta });
        }
        Ok(match self {
            CameraModel::Perspective => f * theta.tan(),
            CameraModel::Stereographic => 2.0 * f * (theta / 2.0).tan(),
            CameraModel::Equidistance => f * theta,
            CameraModel::Equisolid => 2.0 * f * (theta / 2.0).sin(),
            CameraModel::Orthogonal => f * theta.sin(),
        })
    }

    /// Incident angle of an image point at radius `r` from the principal point.
    pub fn incident_angle(self, r: f64, f: f64) -> Result<f64, DomainError> {
        if !r.is_finite() {
            return Err(DomainError::NonFinite("image radius"));
        }
        if r < 0.0 {
            return Err(DomainError::RadiusOutOfRange { model: self, r, max: self.radius_limit() * f });
        }
        let max = self.radius_limit() * f;
        let r = if r > max {
            if r - max <= RADIUS_CLAMP_REL * f {
                max
            } else {
                return Err(DomainError::RadiusOutOfRange { model: self, r, max });
            }
        } else {
            r
        };
        let rho = r / f;
        Ok(match self {
            CameraModel::Perspective => rho.atan(),
            CameraModel::Stereographic => 2.0 * (rho / 2.0).atan(),
            CameraModel::Equidistance => rho,
            CameraModel::Equisolid => 2.0 * (rho / 2.0).min(1.0).asin(),
            CameraModel::Orthogonal => rho.min(1.0).asin(),
        })
    }

    /// The denominator `g_j(θ)` of the fish-eye to pinhole radius ratio.
    pub fn denominator(self, theta: f64) -> f64 {
        match self {
            CameraModel::Perspective => theta.cos(),
            CameraModel::Stereographic => {
                let c = (theta / 2.0).cos();
                c * c
            }
            CameraModel::Equidistance => {
                if theta == 0.0 {
                    1.0
                } else {
                    theta.sin() / theta
                }
            }
            CameraModel::Equisolid => (theta / 2.0).cos(),
            CameraModel::Orthogonal => 1.0,
        }
    }

    /// `G_j(θ) = r_j(θ) / r_1(θ) = cos θ / g_j(θ)`, defined on `[0, π/2)`.
    ///
    /// The perspective ratio is exactly `1.0` so that the extended solver
    /// reduces bit-for-bit to classic POSIT on pinhole input.
    pub fn g_ratio(self, theta: f64) -> Result<f64, DomainError> {
        if !theta.is_finite() {
            return Err(DomainError::NonFinite("incident angle"));
        }
        if !(0.0..FRAC_PI_2).contains(&theta) {
            return Err(DomainError::AngleOutOfRange { model: self, theta });
        }
        Ok(match self {
            CameraModel::Perspective => 1.0,
            _ => theta.cos() / self.denominator(theta),
        })
    }

    /// Projects a camera-frame point (mm) to an image point centered on the
    /// principal point, in isotropic pixels.
    pub fn project(self, intr: &Intrinsics, point_cam: &Vector3<f64>) -> Result<CenteredImagePoint, DomainError> {
        if !(point_cam.x.is_finite() && point_cam.y.is_finite() && point_cam.z.is_finite()) {
            return Err(DomainError::NonFinite("camera-frame point"));
        }
        if point_cam.z <= 0.0 {
            return Err(DomainError::BehindCamera { z: point_cam.z });
        }
        let rho = point_cam.x.hypot(point_cam.y);
        if rho == 0.0 {
            return Ok(CenteredImagePoint::new(0.0, 0.0));
        }
        let theta = rho.atan2(point_cam.z);
        let r = self.radial_distance(theta, intr.f)?;
        Ok(CenteredImagePoint::new(r * point_cam.x / rho, r * point_cam.y / rho))
    }

    /// Largest relative change `|G(θ₁) − G(θ₀)| / G(θ₀)` between the
    /// reference point at `theta0` and the orthographic projection `P_i` of
    /// an object point whose offset from the reference is at most
    /// `extent_ratio · Z₀`, i.e. `|tan θ₁ − tan θ₀| ≤ extent_ratio`.
    ///
    /// Every `G_j` is even and non-increasing in `|θ|`, so the extreme sits at
    /// one end of that interval, with the lower end clamped at the axis.
    pub fn sop_ratio_deviation(self, theta0: f64, extent_ratio: f64) -> Result<f64, DomainError> {
        if !(extent_ratio.is_finite() && extent_ratio >= 0.0) {
            return Err(DomainError::InvalidParameter(format!(
                "extent ratio must be non-negative, got {extent_ratio}"
            )));
        }
        let g0 = self.g_ratio(theta0)?;
        let far = self.g_ratio((theta0.tan() + extent_ratio).atan())?;
        let near = self.g_ratio((theta0.tan() - extent_ratio).max(0.0).atan())?;
        Ok(f64::max((far - g0).abs(), (near - g0).abs()) / g0)
    }
}

impl fmt::Display for CameraModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown camera model `{0}` (expected perspective, stereographic, equidistance, equisolid or orthogonal)")]
pub struct UnknownModel(pub String);

impl FromStr for CameraModel {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perspective" | "pinhole" => Ok(CameraModel::Perspective),
            "stereographic" => Ok(CameraModel::Stereographic),
            "equidistance" | "equidistant" => Ok(CameraModel::Equidistance),
            "equisolid" => Ok(CameraModel::Equisolid),
            "orthogonal" | "orthographic" => Ok(CameraModel::Orthogonal),
            _ => Err(UnknownModel(s.to_owned())),
        }
    }
}

/// Image point relative to the principal point, in isotropic pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CenteredImagePoint {
    pub x: f64,
    pub y: f64,
}

impl CenteredImagePoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Camera intrinsics.
///
/// `f` is the focal length the radial model is evaluated with. `kx`/`ky` are
/// the per-axis pixel scales of the sensor; when present, pixel offsets are
/// rescaled by `f/kx` and `f/ky` into an isotropic frame before the radial
/// model applies. Absent scales default to `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub f: f64,
    pub u0: f64,
    pub v0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ky: Option<f64>,
}

impl Intrinsics {
    pub fn new(f: f64, u0: f64, v0: f64) -> Result<Self, DomainError> {
        let intr = Self { f, u0, v0, kx: None, ky: None };
        intr.validate()?;
        Ok(intr)
    }

    pub fn with_pixel_scales(mut self, kx: f64, ky: f64) -> Result<Self, DomainError> {
        self.kx = Some(kx);
        self.ky = Some(ky);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if !(self.f.is_finite() && self.f > 0.0) {
            return Err(DomainError::InvalidIntrinsics(format!("focal length must be positive, got {}", self.f)));
        }
        if !(self.u0.is_finite() && self.v0.is_finite()) {
            return Err(DomainError::InvalidIntrinsics("principal point must be finite".into()));
        }
        for (name, k) in [("kx", self.kx), ("ky", self.ky)] {
            if let Some(k) = k {
                if !(k.is_finite() && k > 0.0) {
                    return Err(DomainError::InvalidIntrinsics(format!("{name} must be positive, got {k}")));
                }
            }
        }
        Ok(())
    }

    pub fn kx(&self) -> f64 {
        self.kx.unwrap_or(self.f)
    }

    pub fn ky(&self) -> f64 {
        self.ky.unwrap_or(self.f)
    }

    /// Raw pixel `(u, v)` to a centered, isotropic image point.
    pub fn center_pixel(&self, u: f64, v: f64) -> CenteredImagePoint {
        CenteredImagePoint::new((u - self.u0) * (self.f / self.kx()), (v - self.v0) * (self.f / self.ky()))
    }

    /// Inverse of [`Intrinsics::center_pixel`].
    pub fn to_pixel(&self, p: &CenteredImagePoint) -> [f64; 2] {
        [p.x * (self.kx() / self.f) + self.u0, p.y * (self.ky() / self.f) + self.v0]
    }
}
