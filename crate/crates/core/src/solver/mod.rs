//! Extended POSIT.
//!
//! Fish-eye image points are mapped back onto the pinhole image plane by
//! dividing by `G(θ)`, which turns each correspondence into the classic POSIT
//! equations
//!
//! ```text
//! M0Mi · I = (1 + ε_i) / G(θ_Mi) · x'_Mi − x'_M0 / G(θ_M0)
//! M0Mi · J = (1 + ε_i) / G(θ_Mi) · y'_Mi − y'_M0 / G(θ_M0)
//! ```
//!
//! with `I = (f/Z0)·i`, `J = (f/Z0)·j` and `ε_i = M0Mi·k / Z0`. The linear
//! systems are solved with the pseudo-inverse of the offset matrix and `ε` is
//! refined until it stops changing.

mod classic;

pub use classic::{posit_classic, posit_classic_traced};

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera_models::{CameraModel, CenteredImagePoint, DomainError, Intrinsics};
use crate::pose::Pose;

/// Offsets larger than this fraction of `Z0` void the reference-ratio
/// approximation; the solver still runs and flags the estimate.
pub const SOP_EXTENT_RATIO: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("object points are coplanar or degenerate (singular value ratio {sigma_ratio:.3e})")]
    SingularConfiguration { sigma_ratio: f64 },
    #[error("iteration diverged at step {iteration}: {reason}")]
    Diverged { iteration: usize, reason: &'static str },
    #[error("no convergence after {iterations} iterations (last |Δε| = {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Object points given as offsets `M0Mi` from the reference point `M0` (mm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectPointSet {
    offsets: Vec<Vector3<f64>>,
}

impl ObjectPointSet {
    pub fn new(offsets: Vec<Vector3<f64>>) -> Result<Self, SolveError> {
        if offsets.len() < 3 {
            return Err(SolveError::InvalidInput(format!(
                "need at least 3 offsets besides the reference point, got {}",
                offsets.len()
            )));
        }
        if offsets.iter().any(|o| !o.iter().all(|c| c.is_finite())) {
            return Err(SolveError::InvalidInput("non-finite object offset".into()));
        }
        Ok(Self { offsets })
    }

    /// The four object points used throughout the simulations: `M0` at the
    /// origin plus `(200,0,0)`, `(0,200,0)` and `(0,0,−50)` mm.
    pub fn reference_tetrahedron() -> Self {
        Self {
            offsets: vec![Vector3::new(200.0, 0.0, 0.0), Vector3::new(0.0, 200.0, 0.0), Vector3::new(0.0, 0.0, -50.0)],
        }
    }

    pub fn offsets(&self) -> &[Vector3<f64>] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn max_extent(&self) -> f64 {
        self.offsets.iter().map(|o| o.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { offsets: self.offsets.iter().map(|o| o * factor).collect() }
    }
}

/// Object offsets with the matching centered image points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceSet {
    pub object: ObjectPointSet,
    pub image_ref: CenteredImagePoint,
    pub image_pts: Vec<CenteredImagePoint>,
}

impl CorrespondenceSet {
    pub fn new(
        object: ObjectPointSet,
        image_ref: CenteredImagePoint,
        image_pts: Vec<CenteredImagePoint>,
    ) -> Result<Self, SolveError> {
        if image_pts.len() != object.len() {
            return Err(SolveError::InvalidInput(format!(
                "{} object offsets but {} image points",
                object.len(),
                image_pts.len()
            )));
        }
        if !image_ref.is_finite() || image_pts.iter().any(|p| !p.is_finite()) {
            return Err(SolveError::InvalidInput("non-finite image point".into()));
        }
        Ok(Self { object, image_ref, image_pts })
    }

    pub fn len(&self) -> usize {
        self.image_pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image_pts.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once `max_i |ε_i⁽ⁿ⁾ − ε_i⁽ⁿ⁻¹⁾|` falls to this value.
    pub epsilon_tol: f64,
    pub max_iters: usize,
    /// Smallest admissible `σ_min / σ_max` of the offset matrix.
    pub rank_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { epsilon_tol: 1e-6, max_iters: 50, rank_tol: 1e-9 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.epsilon_tol.is_finite() && self.epsilon_tol > 0.0) {
            return Err(SolveError::InvalidInput(format!("epsilon_tol must be positive, got {}", self.epsilon_tol)));
        }
        if self.max_iters == 0 {
            return Err(SolveError::InvalidInput("max_iters must be at least 1".into()));
        }
        if !(self.rank_tol.is_finite() && self.rank_tol >= 0.0) {
            return Err(SolveError::InvalidInput(format!("rank_tol must be non-negative, got {}", self.rank_tol)));
        }
        Ok(())
    }
}

/// Pseudo-inverse of the offset matrix `A` (one row per `M0Mi`).
///
/// Stored column-wise: the solution of `A·v = b` is `Σ_i b_i · columns[i]`.
#[derive(Debug, Clone)]
pub struct ObjectMatrix {
    columns: Vec<Vector3<f64>>,
    sigma_ratio: f64,
}

impl ObjectMatrix {
    pub fn solve(&self, b: &[f64]) -> Vector3<f64> {
        debug_assert_eq!(b.len(), self.columns.len());
        self.columns.iter().zip(b).fold(Vector3::zeros(), |acc, (c, &bi)| acc + c * bi)
    }

    /// `σ_min / σ_max` of the offset matrix.
    pub fn sigma_ratio(&self) -> f64 {
        self.sigma_ratio
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Factorizes the offset matrix; three offsets are inverted exactly, more are
/// solved in the least-squares sense.
pub fn build_object_matrix(object: &ObjectPointSet, rank_tol: f64) -> Result<ObjectMatrix, SolveError> {
    let n = object.len();
    let a = DMatrix::from_fn(n, 3, |r, c| object.offsets[r][c]);
    let svd = a.clone().svd(n > 3, n > 3);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let sigma_ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(sigma_ratio > rank_tol) {
        return Err(SolveError::SingularConfiguration { sigma_ratio });
    }
    let pinv: DMatrix<f64> = if n == 3 {
        let m = Matrix3::from_fn(|r, c| a[(r, c)]);
        let inv = m.try_inverse().ok_or(SolveError::SingularConfiguration { sigma_ratio })?;
        DMatrix::from_fn(3, 3, |r, c| inv[(r, c)])
    } else {
        svd.pseudo_inverse(0.0).map_err(|_| SolveError::SingularConfiguration { sigma_ratio })?
    };
    let columns = (0..n).map(|i| Vector3::new(pinv[(0, i)], pinv[(1, i)], pinv[(2, i)])).collect();
    Ok(ObjectMatrix { columns, sigma_ratio })
}

/// Per-correspondence `G` values, fixed by the measured image points.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRatios {
    pub reference: f64,
    pub points: Vec<f64>,
}

impl RadialRatios {
    pub fn measure(corr: &CorrespondenceSet, model: CameraModel, f: f64) -> Result<Self, DomainError> {
        Self::measure_about(corr, model, f, CenteredImagePoint::new(0.0, 0.0))
    }

    /// Incident angles taken about `center` instead of the principal point.
    pub fn measure_about(
        corr: &CorrespondenceSet,
        model: CameraModel,
        f: f64,
        center: CenteredImagePoint,
    ) -> Result<Self, DomainError> {
        let g = |p: &CenteredImagePoint| -> Result<f64, DomainError> {
            let r = CenteredImagePoint::new(p.x - center.x, p.y - center.y).radius();
            let theta = model.incident_angle(r, f)?;
            model.g_ratio(theta)
        };
        Ok(Self { reference: g(&corr.image_ref)?, points: corr.image_pts.iter().map(g).collect::<Result<_, _>>()? })
    }

    fn rhs_into(&self, corr: &CorrespondenceSet, eps: &[f64], xs: &mut [f64], ys: &mut [f64]) {
        let inv_g0 = 1.0 / self.reference;
        let (x0, y0) = (corr.image_ref.x, corr.image_ref.y);
        for (i, p) in corr.image_pts.iter().enumerate() {
            let w = (1.0 + eps[i]) / self.points[i];
            xs[i] = w * p.x - inv_g0 * x0;
            ys[i] = w * p.y - inv_g0 * y0;
        }
    }
}

/// Right-hand sides `(ξ, η)` of the two linear systems for the given `ε`.
pub fn compute_rhs(
    corr: &CorrespondenceSet,
    model: CameraModel,
    intr: &Intrinsics,
    eps: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), SolveError> {
    if eps.len() != corr.len() {
        return Err(SolveError::InvalidInput(format!("{} ε values for {} correspondences", eps.len(), corr.len())));
    }
    let ratios = RadialRatios::measure(corr, model, intr.f)?;
    let mut xs = vec![0.0; corr.len()];
    let mut ys = vec![0.0; corr.len()];
    ratios.rhs_into(corr, eps, &mut xs, &mut ys);
    Ok((xs, ys))
}

/// Snapshot of one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    /// `I = (f/Z0)·i` in object coordinates.
    pub i_scaled: Vector3<f64>,
    /// `J = (f/Z0)·j` in object coordinates.
    pub j_scaled: Vector3<f64>,
    pub eps: Vec<f64>,
    pub s1: f64,
    pub s2: f64,
    pub s: f64,
    pub z0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseEstimate {
    /// Rows are the camera axes `i`, `j'`, `k'` in object coordinates.
    pub rotation: Matrix3<f64>,
    /// Camera-frame position of the reference point (mm).
    pub translation: Vector3<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `max_i |Δε_i|` of the final iteration.
    pub epsilon_final: f64,
    /// Some offset exceeds `0.1·Z0`.
    pub extent_exceeded: bool,
}

impl PoseEstimate {
    pub fn pose(&self) -> Pose {
        Pose::new(self.rotation, self.translation)
    }

    pub fn require_converged(self) -> Result<Self, SolveError> {
        if self.converged {
            Ok(self)
        } else {
            Err(SolveError::NotConverged { iterations: self.iterations, residual: self.epsilon_final })
        }
    }
}

/// Shared exit step: re-orthonormalize and assemble the pose.
pub(crate) fn finish(
    i: Vector3<f64>,
    k: Vector3<f64>,
    image_ref: CenteredImagePoint,
    translation_scale: f64,
    z0: f64,
    iterations: usize,
    converged: bool,
    epsilon_final: f64,
    max_extent: f64,
) -> Result<PoseEstimate, SolveError> {
    let kn = k.norm();
    if !(kn.is_finite() && kn > 0.0) {
        return Err(SolveError::Diverged { iteration: iterations, reason: "i and j are parallel" });
    }
    let k = k / kn;
    let j = k.cross(&i);
    let rotation = Matrix3::from_rows(&[i.transpose(), j.transpose(), k.transpose()]);
    let translation = Vector3::new(image_ref.x * translation_scale, image_ref.y * translation_scale, z0);
    Ok(PoseEstimate {
        rotation,
        translation,
        iterations,
        converged,
        epsilon_final,
        extent_exceeded: max_extent > SOP_EXTENT_RATIO * z0,
    })
}

/// Estimates the object pose from a correspondence set under `model`.
pub fn solve(
    corr: &CorrespondenceSet,
    model: CameraModel,
    intr: &Intrinsics,
    config: &SolverConfig,
) -> Result<PoseEstimate, SolveError> {
    run(corr, model, intr, config, CenteredImagePoint::new(0.0, 0.0), None)
}

/// As [`solve`], but the incident angles that set `G` are measured about
/// `angle_center` (centered pixels) while the image coordinates stay as
/// given. Models a principal point that is wrong only where the angles are
/// computed; for `Perspective` this has no effect.
pub fn solve_with_angle_center(
    corr: &CorrespondenceSet,
    model: CameraModel,
    intr: &Intrinsics,
    config: &SolverConfig,
    angle_center: CenteredImagePoint,
) -> Result<PoseEstimate, SolveError> {
    run(corr, model, intr, config, angle_center, None)
}

/// As [`solve`], also returning every intermediate state.
pub fn solve_traced(
    corr: &CorrespondenceSet,
    model: CameraModel,
    intr: &Intrinsics,
    config: &SolverConfig,
) -> Result<(PoseEstimate, Vec<SolverState>), SolveError> {
    let mut trace = Vec::new();
    let est = run(corr, model, intr, config, CenteredImagePoint::new(0.0, 0.0), Some(&mut trace))?;
    Ok((est, trace))
}

fn run(
    corr: &CorrespondenceSet,
    model: CameraModel,
    intr: &Intrinsics,
    config: &SolverConfig,
    angle_center: CenteredImagePoint,
    mut trace: Option<&mut Vec<SolverState>>,
) -> Result<PoseEstimate, SolveError> {
    config.validate()?;
    intr.validate()?;
    let n = corr.len();
    if n != corr.object.len() {
        return Err(SolveError::InvalidInput("correspondence length mismatch".into()));
    }
    let a = build_object_matrix(&corr.object, config.rank_tol)?;
    if !angle_center.is_finite() {
        return Err(SolveError::InvalidInput("non-finite angle center".into()));
    }
    let ratios = RadialRatios::measure_about(corr, model, intr.f, angle_center)?;
    let g0 = ratios.reference;
    let f = intr.f;

    let mut eps = vec![0.0; n];
    let mut xs = vec![0.0; n];
    let mut ys = vec![0.0; n];
    let mut converged = false;
    let mut delta = f64::INFINITY;
    let mut iterations = 0;
    let (mut i, mut k, mut z0) = (Vector3::zeros(), Vector3::zeros(), 0.0);

    while iterations < config.max_iters {
        iterations += 1;
        ratios.rhs_into(corr, &eps, &mut xs, &mut ys);
        let big_i = a.solve(&xs);
        let big_j = a.solve(&ys);
        let s1 = g0 * big_i.norm();
        let s2 = g0 * big_j.norm();
        let s = (s1 + s2) / 2.0;
        if !(s1 > 0.0 && s2 > 0.0 && s.is_finite()) {
            return Err(SolveError::Diverged { iteration: iterations, reason: "non-positive scale factor" });
        }
        i = big_i * g0 / s1;
        let j = big_j * g0 / s2;
        k = i.cross(&j);
        z0 = g0 * f / s;
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(SolveError::Diverged { iteration: iterations, reason: "non-positive depth" });
        }
        delta = 0.0;
        for (e, o) in eps.iter_mut().zip(corr.object.offsets()) {
            let next = o.dot(&k) / z0;
            if !next.is_finite() {
                return Err(SolveError::Diverged { iteration: iterations, reason: "non-finite depth correction" });
            }
            delta = f64::max(delta, (next - *e).abs());
            *e = next;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(SolverState { i_scaled: big_i, j_scaled: big_j, eps: eps.clone(), s1, s2, s, z0 });
        }
        if delta <= config.epsilon_tol {
            converged = true;
            break;
        }
    }

    finish(i, k, corr.image_ref, z0 / (f * g0), z0, iterations, converged, delta, corr.object.max_extent())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::matrix_from_euler_xyz;
    use approx::assert_abs_diff_eq;

    fn forward(object: &ObjectPointSet, pose: &Pose, model: CameraModel, intr: &Intrinsics) -> CorrespondenceSet {
        let proj = |p: Vector3<f64>| model.project(intr, &pose.transform(&p)).unwrap();
        CorrespondenceSet::new(
            object.clone(),
            proj(Vector3::zeros()),
            object.offsets().iter().map(|o| proj(*o)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn object_matrix_examples() {
        assert!(build_object_matrix(&ObjectPointSet::reference_tetrahedron(), 1e-9).is_ok());
        let coplanar = ObjectPointSet::new(vec![
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(1.0, 1.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(build_object_matrix(&coplanar, 1e-9), Err(SolveError::SingularConfiguration { .. })));
    }

    #[test]
    fn least_squares_recovers_consistent_solution() {
        let square = ObjectPointSet::reference_tetrahedron();
        let over = ObjectPointSet::new(vec![
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(1.0, 1.0, 1.0),
        ])
        .unwrap();
        let v = Vector3::new(0.3, -1.7, 2.2);
        for obj in [square, over] {
            let a = build_object_matrix(&obj, 1e-9).unwrap();
            let b: Vec<f64> = obj.offsets().iter().map(|o| o.dot(&v)).collect();
            assert_abs_diff_eq!(a.solve(&b), v, epsilon = 1e-12);
        }
    }

    #[test]
    fn too_few_offsets() {
        assert!(ObjectPointSet::new(vec![Vector3::x(), Vector3::y()]).is_err());
    }

    #[test]
    fn rhs_reduces_to_classic_for_pinhole() {
        let intr = Intrinsics::new(1353.0, 0.0, 0.0).unwrap();
        let corr = CorrespondenceSet::new(
            ObjectPointSet::reference_tetrahedron(),
            CenteredImagePoint::new(10.0, -4.0),
            vec![
                CenteredImagePoint::new(30.0, 2.0),
                CenteredImagePoint::new(-5.0, 8.0),
                CenteredImagePoint::new(11.0, 1.0),
            ],
        )
        .unwrap();
        let eps = [0.01, -0.02, 0.005];
        let (xs, ys) = compute_rhs(&corr, CameraModel::Perspective, &intr, &eps).unwrap();
        for i in 0..3 {
            assert_eq!(xs[i], (1.0 + eps[i]) * corr.image_pts[i].x - 10.0);
            assert_eq!(ys[i], (1.0 + eps[i]) * corr.image_pts[i].y + 4.0);
        }
    }

    #[test]
    fn rhs_vanishes_for_identical_points() {
        let intr = Intrinsics::new(1353.0, 0.0, 0.0).unwrap();
        let p = CenteredImagePoint::new(12.5, -7.25);
        let corr = CorrespondenceSet::new(ObjectPointSet::reference_tetrahedron(), p, vec![p; 3]).unwrap();
        let (xs, ys) = compute_rhs(&corr, CameraModel::Perspective, &intr, &[0.0; 3]).unwrap();
        assert!(xs.iter().chain(&ys).all(|&v| v == 0.0));
    }

    #[test]
    fn rhs_orthogonal_matches_oracle() {
        let intr = Intrinsics::new(541.0, 0.0, 0.0).unwrap();
        let corr = CorrespondenceSet::new(
            ObjectPointSet::reference_tetrahedron(),
            CenteredImagePoint::new(27.016, 0.0),
            vec![
                CenteredImagePoint::new(54.0, 0.0),
                CenteredImagePoint::new(0.0, 0.0),
                CenteredImagePoint::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let (xs, _) = compute_rhs(&corr, CameraModel::Orthogonal, &intr, &[0.0; 3]).unwrap();
        // 40-digit oracle: 54/cos(asin(54/541)) − 27.016/cos(asin(27.016/541))
        assert_abs_diff_eq!(xs[0], 27.221_281_383_235_07, epsilon = 1e-10);
    }

    #[test]
    fn rhs_propagates_domain_errors() {
        let intr = Intrinsics::new(541.0, 0.0, 0.0).unwrap();
        let corr = CorrespondenceSet::new(
            ObjectPointSet::reference_tetrahedron(),
            CenteredImagePoint::new(0.0, 0.0),
            vec![
                CenteredImagePoint::new(600.0, 0.0),
                CenteredImagePoint::new(0.0, 0.0),
                CenteredImagePoint::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            compute_rhs(&corr, CameraModel::Orthogonal, &intr, &[0.0; 3]),
            Err(SolveError::Domain(DomainError::RadiusOutOfRange { .. }))
        ));
    }

    #[test]
    fn identity_pose_pinhole() {
        let intr = Intrinsics::new(1353.0, 0.0, 0.0).unwrap();
        let truth = Pose::new(Matrix3::identity(), Vector3::new(0.0, 0.0, 2000.0));
        let corr = forward(&ObjectPointSet::reference_tetrahedron(), &truth, CameraModel::Perspective, &intr);
        let est = solve(&corr, CameraModel::Perspective, &intr, &SolverConfig::default()).unwrap();
        assert!(est.converged);
        assert_abs_diff_eq!(est.rotation, truth.rotation, epsilon = 1e-7);
        assert_abs_diff_eq!(est.translation, truth.translation, epsilon = 1e-3);
    }

    #[test]
    fn identity_pose_orthogonal() {
        let intr = Intrinsics::new(541.0, 0.0, 0.0).unwrap();
        let truth = Pose::new(Matrix3::identity(), Vector3::new(0.0, 0.0, 2000.0));
        let corr = forward(&ObjectPointSet::reference_tetrahedron(), &truth, CameraModel::Orthogonal, &intr);
        let est = solve(&corr, CameraModel::Orthogonal, &intr, &SolverConfig::default()).unwrap();
        assert!(est.converged);
        let e = est.pose().euler_xyz_deg();
        assert!(e.iter().all(|a| a.abs() < 1.0), "{e:?}");
        assert!((est.translation.z - 2000.0).abs() < 20.0);
    }

    #[test]
    fn fisheye_noiseless_is_exact() {
        let intr = Intrinsics::new(541.0, 0.0, 0.0).unwrap();
        let truth = Pose::new(matrix_from_euler_xyz(0.4, -0.3, 1.1), Vector3::new(-300.0, 450.0, 1800.0));
        for model in CameraModel::FISHEYE {
            let corr = forward(&ObjectPointSet::reference_tetrahedron(), &truth, model, &intr);
            let est = solve(&corr, model, &intr, &SolverConfig::default()).unwrap();
            assert_abs_diff_eq!(est.rotation, truth.rotation, epsilon = 1e-6);
            assert_abs_diff_eq!(est.translation, truth.translation, epsilon = 1e-2);
        }
    }

    #[test]
    fn angle_center() {
        let intr = Intrinsics::new(541.0, 0.0, 0.0).unwrap();
        let truth = Pose::new(matrix_from_euler_xyz(0.2, 0.1, -0.4), Vector3::new(120.0, -60.0, 2000.0));
        let cfg = SolverConfig::default();
        let origin = CenteredImagePoint::new(0.0, 0.0);
        let shifted = CenteredImagePoint::new(16.0, 12.0);
        for model in CameraModel::ALL {
            let corr = forward(&ObjectPointSet::reference_tetrahedron(), &truth, model, &intr);
            let base = solve(&corr, model, &intr, &cfg).unwrap();
            assert_eq!(solve_with_angle_center(&corr, model, &intr, &cfg, origin).unwrap(), base);
            let moved = solve_with_angle_center(&corr, model, &intr, &cfg, shifted).unwrap();
            if model == CameraModel::Perspective {
                assert_eq!(moved, base);
            } else {
                assert_ne!(moved, base);
                assert_abs_diff_eq!(moved.rotation, base.rotation, epsilon = 1e-2);
            }
        }
    }

    #[test]
    fn coplanar_points_are_rejected() {
        let intr = Intrinsics::new(1353.0, 0.0, 0.0).unwrap();
        let object = ObjectPointSet::new(vec![
            Vector3::new(200.0, 0.0, 0.0),
            Vector3::new(0.0, 200.0, 0.0),
            Vector3::new(200.0, 200.0, 0.0),
        ])
        .unwrap();
        let truth = Pose::new(Matrix3::identity(), Vector3::new(0.0, 0.0, 2000.0));
        let corr = forward(&object, &truth, CameraModel::Perspective, &intr);
        assert!(matches!(
            solve(&corr, CameraModel::Perspective, &intr, &SolverConfig::default()),
            Err(SolveError::SingularConfiguration { .. })
        ));
    }

    #[test]
    fn not_converged_still_returns_rotation() {
        let intr = Intrinsics::new(1353.0, 0.0, 0.0).unwrap();
        let truth = Pose::new(matrix_from_euler_xyz(0.2, 0.5, -0.3), Vector3::new(400.0, 100.0, 1200.0));
        let corr = forward(&ObjectPointSet::reference_tetrahedron(), &truth, CameraModel::Perspective, &intr);
        let cfg = SolverConfig { max_iters: 1, ..SolverConfig::default() };
        let est = solve(&corr, CameraModel::Perspective, &intr, &cfg).unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations, 1);
        let r = est.rotation;
        assert_abs_diff_eq!(r.transpose() * r, Matrix3::identity(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-12);
        assert!(matches!(est.require_converged(), Err(SolveError::NotConverged { iterations: 1, .. })));
    }

    #[test]
    fn extent_flag() {
        let intr = Intrinsics::new(1353.0, 0.0, 0.0).unwrap();
        let truth = Pose::new(Matrix3::identity(), Vector3::new(0.0, 0.0, 1000.0));
        let big = ObjectPointSet::reference_tetrahedron().scaled(3.0);
        let est = solve(
            &forward(&big, &truth, CameraModel::Perspective, &intr),
            CameraModel::Perspective,
            &intr,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(est.extent_exceeded);
        let small = ObjectPointSet::reference_tetrahedron();
        let truth = Pose::new(Matrix3::identity(), Vector3::new(0.0, 0.0, 2500.0));
        let est = solve(
            &forward(&small, &truth, CameraModel::Perspective, &intr),
            CameraModel::Perspective,
            &intr,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(!est.extent_exceeded);
    }

    #[test]
    fn invalid_config() {
        let intr = Intrinsics::new(1353.0, 0.0, 0.0).unwrap();
        let truth = Pose::new(Matrix3::identity(), Vector3::new(0.0, 0.0, 2000.0));
        let corr = forward(&ObjectPointSet::reference_tetrahedron(), &truth, CameraModel::Perspective, &intr);
        for cfg in [
            SolverConfig { epsilon_tol: 0.0, ..Default::default() },
            SolverConfig { max_iters: 0, ..Default::default() },
        ] {
            assert!(matches!(solve(&corr, CameraModel::Perspective, &intr, &cfg), Err(SolveError::InvalidInput(_))));
        }
    }

    #[test]
    fn mismatched_lengths() {
        let r = CorrespondenceSet::new(ObjectPointSet::reference_tetrahedron(), CenteredImagePoint::default(), vec![]);
        assert!(matches!(r, Err(SolveError::InvalidInput(_))));
    }
}
