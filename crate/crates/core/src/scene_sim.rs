//! Seeded synthetic scenes.
//!
//! The object moves along a cylindrical helix in front of a fixed camera,
//!
//! ```text
//! X(t) = R·cos(φ + t),  Y(t) = R·sin(φ + t),  Z(t) = Z₀ + ż·t
//! ```
//!
//! with `t` read as degrees inside the trigonometric terms, while rotating at a
//! constant angular rate. Each frame is projected through a camera model onto
//! the sensor and perturbed with independent Gaussian pixel noise.
//!
//! Randomness comes from ChaCha8 seeded with the run seed, one stream per
//! frame index, so frames are reproducible individually and in any order.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::camera_models::{CameraModel, DomainError, Intrinsics};
use crate::pose::{matrix_from_euler_xyz, Pose};
use crate::solver::{CorrespondenceSet, ObjectPointSet};

/// Name recorded in run metadata for the noise generator.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng(seed_from_u64(seed), stream = frame index); rand_distr::Normal";

/// How the elapsed rotation angle is distributed over the camera axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationProfile {
    /// `Rx(a)·Ry(a)·Rz(a)` with `a` the elapsed angle.
    EqualRateXyz,
    AboutX,
    AboutY,
    AboutZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelixTrajectory {
    /// Helix radius (mm).
    pub radius_scale: f64,
    /// Angular offset of the helix at `t = 0` (degrees).
    pub phase_deg: f64,
    /// Depth at `t = 0` (mm).
    pub z_offset: f64,
    /// Depth gained per time unit (mm).
    pub z_rate: f64,
    /// Rotation rate (degrees per time unit).
    pub angular_rate_deg: f64,
    pub rotation: RotationProfile,
}

impl Default for HelixTrajectory {
    fn default() -> Self {
        Self {
            radius_scale: 100.0 * std::f64::consts::SQRT_2,
            phase_deg: 45.0,
            z_offset: 2000.0,
            z_rate: 0.25,
            angular_rate_deg: 0.1,
            rotation: RotationProfile::EqualRateXyz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation per pixel coordinate.
    pub sigma: f64,
    pub mean: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Self {
        Self { sigma, mean: 0.0, seed }
    }

    pub fn noiseless() -> Self {
        Self::new(0.0, 0)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(DomainError::InvalidParameter(format!("noise sigma must be non-negative, got {}", self.sigma)));
        }
        if !self.mean.is_finite() {
            return Err(DomainError::NonFinite("noise mean"));
        }
        Ok(())
    }

    fn distribution(&self) -> Normal<f64> {
        Normal::new(self.mean, self.sigma).expect("validated sigma")
    }
}

/// Raw sensor pixels, reference point first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelObservation {
    pub reference: [f64; 2],
    pub points: Vec<[f64; 2]>,
}

impl PixelObservation {
    /// Centers the pixels with (possibly different) intrinsics.
    pub fn center(&self, object: &ObjectPointSet, intr: &Intrinsics) -> CorrespondenceSet {
        let c = |p: &[f64; 2]| intr.center_pixel(p[0], p[1]);
        CorrespondenceSet {
            object: object.clone(),
            image_ref: c(&self.reference),
            image_pts: self.points.iter().map(c).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSample {
    pub t: f64,
    pub truth: Pose,
    /// Noisy correspondences centered with the generating intrinsics.
    pub corr: CorrespondenceSet,
    pub corr_clean: CorrespondenceSet,
    /// Noisy sensor pixels behind `corr`.
    pub pixels: PixelObservation,
}

/// Ground-truth pose at time `t`.
pub fn helix_pose(traj: &HelixTrajectory, t: f64) -> Result<Pose, DomainError> {
    let z = traj.z_offset + traj.z_rate * t;
    if !z.is_finite() {
        return Err(DomainError::NonFinite("trajectory depth"));
    }
    if z <= 0.0 {
        return Err(DomainError::BehindCamera { z });
    }
    let arg = (traj.phase_deg + t).to_radians();
    let translation = Vector3::new(traj.radius_scale * arg.cos(), traj.radius_scale * arg.sin(), z);
    let a = (traj.angular_rate_deg * t).to_radians();
    let rotation = match traj.rotation {
        RotationProfile::EqualRateXyz => matrix_from_euler_xyz(a, a, a),
        RotationProfile::AboutX => matrix_from_euler_xyz(a, 0.0, 0.0),
        RotationProfile::AboutY => matrix_from_euler_xyz(0.0, a, 0.0),
        RotationProfile::AboutZ => matrix_from_euler_xyz(0.0, 0.0, a),
    };
    Ok(Pose::new(rotation, translation))
}

/// Noiseless correspondences of `object` seen at `pose`.
pub fn project_scene(
    object: &ObjectPointSet,
    pose: &Pose,
    model: CameraModel,
    intr: &Intrinsics,
) -> Result<CorrespondenceSet, DomainError> {
    let image_ref = model.project(intr, &pose.translation)?;
    let image_pts =
        object.offsets().iter().map(|o| model.project(intr, &pose.transform(o))).collect::<Result<Vec<_>, _>>()?;
    Ok(CorrespondenceSet { object: object.clone(), image_ref, image_pts })
}

/// Bounds for [`random_scene`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneBounds {
    /// Depth range of the reference point (mm).
    pub depth: (f64, f64),
    /// Largest offset from the reference point, as a fraction of its depth.
    pub extent_ratio: f64,
    /// Every point stays below this incident angle (degrees).
    pub max_incident_deg: f64,
    /// Smallest admissible `σ_min / σ_max` of the offsets, which keeps the
    /// points well away from coplanar.
    pub min_sigma_ratio: f64,
}

impl Default for SceneBounds {
    fn default() -> Self {
        Self { depth: (1000.0, 4000.0), extent_ratio: 0.1, max_incident_deg: 60.0, min_sigma_ratio: 0.1 }
    }
}

/// Random reference-plus-three-points object and a pose that keeps every
/// point in front of the camera within the angle bound.
pub fn random_scene<R: Rng + ?Sized>(rng: &mut R, bounds: &SceneBounds) -> (ObjectPointSet, Pose) {
    let max_tan = bounds.max_incident_deg.to_radians().tan();
    loop {
        let z0 = rng.random_range(bounds.depth.0..=bounds.depth.1);
        let extent = bounds.extent_ratio * z0;
        let offsets: Vec<Vector3<f64>> = (0..3)
            .map(|_| {
                let dir = Vector3::from_fn(|_, _| StandardNormal.sample(rng)).normalize();
                dir * extent * rng.random_range(0.3..=1.0)
            })
            .collect();
        let m = nalgebra::Matrix3::from_rows(&[offsets[0].transpose(), offsets[1].transpose(), offsets[2].transpose()]);
        let sv = m.singular_values();
        if sv.min() < bounds.min_sigma_ratio * sv.max() {
            continue;
        }
        let q = nalgebra::Quaternion::from_vector(nalgebra::Vector4::from_fn(|_, _| StandardNormal.sample(rng)));
        let rotation = *nalgebra::UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix();
        let reach = max_tan * 0.9;
        let (tx, ty) = (rng.random_range(-reach..=reach), rng.random_range(-reach..=reach));
        let pose = Pose::new(rotation, Vector3::new(tx * z0, ty * z0, z0));
        let inside = std::iter::once(Vector3::zeros()).chain(offsets.iter().copied()).all(|o| {
            let p = pose.transform(&o);
            p.z > 0.0 && p.x.hypot(p.y) < max_tan * p.z
        });
        if inside {
            let object = ObjectPointSet::new(offsets).expect("three offsets");
            return (object, pose);
        }
    }
}

/// Generator for the noise of frame `index`.
pub fn frame_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One simulated frame.
///
/// `intr` describes the generating camera: projections are made with `f`,
/// mapped onto the sensor with `kx`/`ky` and the principal point, then noise
/// is added per pixel coordinate. Noise is drawn for the reference point
/// first, `u` before `v`.
pub fn synthesize_frame<R: Rng + ?Sized>(
    traj: &HelixTrajectory,
    t: f64,
    object: &ObjectPointSet,
    model: CameraModel,
    intr: &Intrinsics,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<FrameSample, DomainError> {
    intr.validate()?;
    noise.validate()?;
    let truth = helix_pose(traj, t)?;
    let clean = project_scene(object, &truth, model, intr)?;

    let clean_px = PixelObservation {
        reference: intr.to_pixel(&clean.image_ref),
        points: clean.image_pts.iter().map(|p| intr.to_pixel(p)).collect(),
    };
    let dist = noise.distribution();
    let mut perturb = |p: &[f64; 2]| -> [f64; 2] {
        let du = dist.sample(rng);
        let dv = dist.sample(rng);
        [p[0] + du, p[1] + dv]
    };
    let pixels = PixelObservation {
        reference: perturb(&clean_px.reference),
        points: clean_px.points.iter().map(&mut perturb).collect(),
    };

    Ok(FrameSample { t, truth, corr: pixels.center(object, intr), corr_clean: clean_px.center(object, intr), pixels })
}

/// Everything needed to regenerate a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub trajectory: HelixTrajectory,
    pub object: ObjectPointSet,
    pub model: CameraModel,
    /// Generating camera.
    pub camera: Intrinsics,
    pub noise: NoiseSpec,
    pub frames: usize,
    /// Time units between consecutive frames; frame `k` is at `k · time_step`.
    pub time_step: f64,
}

impl SimulationConfig {
    pub fn frame(&self, index: usize) -> Result<FrameSample, DomainError> {
        let mut rng = frame_rng(self.noise.seed, index as u64);
        let t = index as f64 * self.time_step;
        synthesize_frame(&self.trajectory, t, &self.object, self.model, &self.camera, &self.noise, &mut rng)
    }

    pub fn run(&self) -> Result<Vec<FrameSample>, DomainError> {
        (0..self.frames).map(|k| self.frame(k)).collect()
    }
}

/// Camera intrinsics of the simulated fish-eye camera.
pub fn fisheye_camera() -> Intrinsics {
    Intrinsics { f: 541.0, u0: 782.41, v0: 613.71, kx: Some(552.39), ky: Some(552.69) }
}

/// Camera intrinsics of the simulated pinhole camera.
pub fn pinhole_camera() -> Intrinsics {
    Intrinsics { f: 1353.0, u0: 807.41, v0: 602.47, kx: Some(1378.65), ky: Some(1381.37) }
}

/// Generating camera for `model` in the default benchmark.
pub fn default_camera(model: CameraModel) -> Intrinsics {
    if model.is_fisheye() {
        fisheye_camera()
    } else {
        pinhole_camera()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, SolverConfig};
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix3;

    #[test]
    fn helix_examples() {
        let traj = HelixTrajectory::default();
        let p = helix_pose(&traj, 0.0).unwrap();
        assert_abs_diff_eq!(p.translation, Vector3::new(100.0, 100.0, 2000.0), epsilon = 1e-12);
        assert_eq!(p.rotation, Matrix3::identity());
        let p = helix_pose(&traj, 90.0).unwrap();
        assert_abs_diff_eq!(p.translation, Vector3::new(-100.0, 100.0, 2022.5), epsilon = 1e-12);
        let e = p.euler_xyz_deg();
        assert_abs_diff_eq!(e, Vector3::new(9.0, 9.0, 9.0), epsilon = 1e-10);
    }

    #[test]
    fn helix_behind_camera() {
        let traj = HelixTrajectory { z_rate: -10.0, ..Default::default() };
        assert!(matches!(helix_pose(&traj, 200.0), Err(DomainError::BehindCamera { .. })));
    }

    #[test]
    fn single_axis_profiles() {
        for (profile, axis) in
            [(RotationProfile::AboutX, 0), (RotationProfile::AboutY, 1), (RotationProfile::AboutZ, 2)]
        {
            let traj = HelixTrajectory { rotation: profile, ..Default::default() };
            let e = helix_pose(&traj, 100.0).unwrap().euler_xyz_deg();
            for k in 0..3 {
                assert_abs_diff_eq!(e[k], if k == axis { 10.0 } else { 0.0 }, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn pinhole_reference_projection() {
        let intr = Intrinsics::new(1353.0, 0.0, 0.0).unwrap();
        let mut rng = frame_rng(1, 0);
        let f = synthesize_frame(
            &HelixTrajectory::default(),
            0.0,
            &ObjectPointSet::reference_tetrahedron(),
            CameraModel::Perspective,
            &intr,
            &NoiseSpec::new(0.4, 1),
            &mut rng,
        )
        .unwrap();
        assert_abs_diff_eq!(f.corr_clean.image_ref.x, 67.65, epsilon = 1e-9);
        assert_abs_diff_eq!(f.corr_clean.image_ref.y, 67.65, epsilon = 1e-9);
    }

    #[test]
    fn zero_sigma_is_noiseless() {
        let cfg = SimulationConfig {
            trajectory: HelixTrajectory::default(),
            object: ObjectPointSet::reference_tetrahedron(),
            model: CameraModel::Equisolid,
            camera: fisheye_camera(),
            noise: NoiseSpec::new(0.0, 9),
            frames: 5,
            time_step: 1.0,
        };
        for f in cfg.run().unwrap() {
            assert_eq!(f.corr, f.corr_clean);
        }
    }

    #[test]
    fn seeded_frames_are_identical() {
        let cfg = SimulationConfig {
            trajectory: HelixTrajectory::default(),
            object: ObjectPointSet::reference_tetrahedron(),
            model: CameraModel::Stereographic,
            camera: fisheye_camera(),
            noise: NoiseSpec::new(0.4, 42),
            frames: 20,
            time_step: 1.0,
        };
        let a = cfg.run().unwrap();
        let b = cfg.run().unwrap();
        assert_eq!(a, b);
        assert_eq!(cfg.frame(7).unwrap(), a[7]);
        assert_ne!(a[3].corr, a[3].corr_clean);
    }

    #[test]
    fn clean_channel_recovers_truth() {
        let cfg = SimulationConfig {
            trajectory: HelixTrajectory::default(),
            object: ObjectPointSet::reference_tetrahedron(),
            model: CameraModel::Perspective,
            camera: pinhole_camera(),
            noise: NoiseSpec::new(0.4, 3),
            frames: 360,
            time_step: 1.0,
        };
        for k in (0..360).step_by(17) {
            let frame = cfg.frame(k).unwrap();
            let est =
                solve(&frame.corr_clean, CameraModel::Perspective, &cfg.camera, &SolverConfig::default()).unwrap();
            let err = crate::metrics::pose_error(&est, &frame.truth);
            assert!(err.rot_err.iter().all(|e| e.abs() < 0.01), "{err:?}");
            assert!(err.trans_err.iter().all(|e| e.abs() < 0.1), "{err:?}");
        }
    }

    #[test]
    fn rejects_negative_sigma() {
        let mut rng = frame_rng(0, 0);
        let r = synthesize_frame(
            &HelixTrajectory::default(),
            0.0,
            &ObjectPointSet::reference_tetrahedron(),
            CameraModel::Perspective,
            &pinhole_camera(),
            &NoiseSpec::new(-1.0, 0),
            &mut rng,
        );
        assert!(r.is_err());
    }
}
