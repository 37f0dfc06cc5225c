//! Plain POSIT for pinhole cameras. Kept separate from the extended solver
//! so it can serve as a reference for it.

use nalgebra::Vector3;

use super::{build_object_matrix, finish, CorrespondenceSet, PoseEstimate, SolveError, SolverConfig, SolverState};

pub fn posit_classic(corr: &CorrespondenceSet, f: f64, config: &SolverConfig) -> Result<PoseEstimate, SolveError> {
    run(corr, f, config, None)
}

pub fn posit_classic_traced(
    corr: &CorrespondenceSet,
    f: f64,
    config: &SolverConfig,
) -> Result<(PoseEstimate, Vec<SolverState>), SolveError> {
    let mut trace = Vec::new();
    let est = run(corr, f, config, Some(&mut trace))?;
    Ok((est, trace))
}

fn run(
    corr: &CorrespondenceSet,
    f: f64,
    config: &SolverConfig,
    mut trace: Option<&mut Vec<SolverState>>,
) -> Result<PoseEstimate, SolveError> {
    config.validate()?;
    if !(f.is_finite() && f > 0.0) {
        return Err(SolveError::InvalidInput(format!("focal length must be positive, got {f}")));
    }
    let a = build_object_matrix(&corr.object, config.rank_tol)?;
    let offsets = corr.object.offsets();
    let (x0, y0) = (corr.image_ref.x, corr.image_ref.y);

    let mut eps = vec![0.0; offsets.len()];
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    let mut converged = false;
    let (mut i, mut k, mut z0) = (Vector3::zeros(), Vector3::zeros(), 0.0);

    while iterations < config.max_iters {
        iterations += 1;
        let xs: Vec<f64> = corr.image_pts.iter().zip(&eps).map(|(p, e)| (1.0 + e) * p.x - x0).collect();
        let ys: Vec<f64> = corr.image_pts.iter().zip(&eps).map(|(p, e)| (1.0 + e) * p.y - y0).collect();
        let big_i = a.solve(&xs);
        let big_j = a.solve(&ys);
        let s1 = big_i.norm();
        let s2 = big_j.norm();
        let s = (s1 + s2) / 2.0;
        if !(s1 > 0.0 && s2 > 0.0 && s.is_finite()) {
            return Err(SolveError::Diverged { iteration: iterations, reason: "non-positive scale factor" });
        }
        i = big_i / s1;
        let j = big_j / s2;
        k = i.cross(&j);
        z0 = f / s;
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(SolveError::Diverged { iteration: iterations, reason: "non-positive depth" });
        }
        let next: Vec<f64> = offsets.iter().map(|o| o.dot(&k) / z0).collect();
        if next.iter().any(|e| !e.is_finite()) {
            return Err(SolveError::Diverged { iteration: iterations, reason: "non-finite depth correction" });
        }
        delta = next.iter().zip(&eps).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        eps = next;
        if let Some(t) = trace.as_deref_mut() {
            t.push(SolverState { i_scaled: big_i, j_scaled: big_j, eps: eps.clone(), s1, s2, s, z0 });
        }
        if delta <= config.epsilon_tol {
            converged = true;
            break;
        }
    }

    finish(i, k, corr.image_ref, z0 / f, z0, iterations, converged, delta, corr.object.max_extent())
}
