//! Helix benchmark: simulate every model, solve every frame, summarize
//! errors, compare fish-eye models against each other and measure how much
//! the estimates move when the assumed principal point is shifted.
//!
//! The principal-point study runs two ways. `angle` keeps the image
//! coordinates and only measures incident angles about the shifted point,
//! which is where the solver needs the principal point. `recentered` also
//! re-centers the image coordinates, which moves the whole image by the shift
//! and tilts the recovered pose by roughly `offset / f` radians.

use eposit::io_formats::{ResultRow, RunManifest};
use eposit::metrics::{pose_difference, pose_error, summarize, Channel, ErrorSummary, PoseError};
use eposit::scene_sim::{default_camera, FrameSample, HelixTrajectory, NoiseSpec, SimulationConfig};
use eposit::{
    solve, solve_with_angle_center, CameraModel, CenteredImagePoint, Intrinsics, ObjectPointSet, SolverConfig,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub models: Vec<CameraModel>,
    pub frames: usize,
    pub time_step: f64,
    pub sigma: f64,
    pub seed: u64,
    /// Shift (pixels) applied to the solver's principal point in the
    /// robustness study.
    pub pp_offset: [f64; 2],
    /// Hand the calibrated pixel scales to the solver instead of only the
    /// nominal focal length.
    pub calibrated_scales: bool,
    pub trajectory: HelixTrajectory,
    pub object: ObjectPointSet,
    pub solver: SolverConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            models: CameraModel::ALL.to_vec(),
            frames: 360,
            time_step: 1.0,
            sigma: 0.4,
            seed: 1,
            pp_offset: [20.0, 15.0],
            calibrated_scales: false,
            trajectory: HelixTrajectory::default(),
            object: ObjectPointSet::reference_tetrahedron(),
            solver: SolverConfig::default(),
        }
    }
}

impl BenchConfig {
    pub fn simulation(&self, model: CameraModel) -> SimulationConfig {
        SimulationConfig {
            trajectory: self.trajectory,
            object: self.object.clone(),
            model,
            camera: default_camera(model),
            noise: NoiseSpec::new(self.sigma, self.seed),
            frames: self.frames,
            time_step: self.time_step,
        }
    }

    /// What the solver is told about the camera.
    pub fn solver_intrinsics(&self, camera: &Intrinsics) -> Intrinsics {
        if self.calibrated_scales {
            *camera
        } else {
            Intrinsics { kx: None, ky: None, ..*camera }
        }
    }
}

/// Per-channel means of a list of errors.
pub fn channel_means(errors: &[PoseError]) -> [f64; 6] {
    let n = errors.len().max(1) as f64;
    Channel::ALL.map(|c| errors.iter().map(|e| e.channel(c)).sum::<f64>() / n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRun {
    pub model: CameraModel,
    pub manifest: RunManifest,
    pub rows: Vec<ResultRow>,
    pub summary: ErrorSummary,
    /// Frames the solver rejected outright.
    pub failed: usize,
    pub not_converged: usize,
    /// Shifted principal point used for incident angles only.
    pub pp_angle: PrincipalPointStudy,
    /// Shifted principal point used for re-centering as well.
    pub pp_recentered: PrincipalPointStudy,
}

impl ModelRun {
    pub fn mean_errors(&self) -> [f64; 6] {
        self.summary.channels.map(|b| b.mean)
    }
}

/// Differences `perturbed − baseline` of the estimates per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalPointStudy {
    pub offset: [f64; 2],
    pub deltas: Vec<PoseError>,
    pub mean_delta: [f64; 6],
    pub max_abs_delta: [f64; 6],
}

impl PrincipalPointStudy {
    fn new(offset: [f64; 2], deltas: Vec<PoseError>) -> Self {
        let mut max_abs_delta = [0.0f64; 6];
        for d in &deltas {
            for (m, v) in max_abs_delta.iter_mut().zip(d.to_array()) {
                *m = m.max(v.abs());
            }
        }
        Self { offset, mean_delta: channel_means(&deltas), max_abs_delta, deltas }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossModelDelta {
    pub a: CameraModel,
    pub b: CameraModel,
    /// `mean(a) − mean(b)` per channel.
    pub mean_delta: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub runs: Vec<ModelRun>,
    pub cross_model: Vec<CrossModelDelta>,
}

impl BenchReport {
    /// Largest `|mean(a) − mean(b)|` over fish-eye pairs, per channel.
    pub fn max_cross_model_delta(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        for d in &self.cross_model {
            for (o, v) in out.iter_mut().zip(d.mean_delta) {
                *o = f64::max(*o, v.abs());
            }
        }
        out
    }

    pub fn run(&self, model: CameraModel) -> Option<&ModelRun> {
        self.runs.iter().find(|r| r.model == model)
    }
}

pub fn run_model(cfg: &BenchConfig, model: CameraModel) -> Result<ModelRun, CliError> {
    let sim = cfg.simulation(model);
    let frames: Vec<FrameSample> = sim.run()?;
    let intr = cfg.solver_intrinsics(&sim.camera);
    let [du, dv] = cfg.pp_offset;
    let shifted = Intrinsics { u0: intr.u0 + du, v0: intr.v0 + dv, ..intr };
    let angle_center = CenteredImagePoint::new(du * intr.f / intr.kx(), dv * intr.f / intr.ky());

    let mut rows = Vec::with_capacity(frames.len());
    let mut angle_deltas = Vec::with_capacity(frames.len());
    let mut recentered_deltas = Vec::with_capacity(frames.len());
    let mut failed = 0;
    let mut not_converged = 0;
    for frame in &frames {
        let corr = frame.pixels.center(&sim.object, &intr);
        let est = match solve(&corr, model, &intr, &cfg.solver) {
            Ok(e) => e,
            Err(_) => {
                failed += 1;
                continue;
            }
        };
        if !est.converged {
            not_converged += 1;
        }
        rows.push(ResultRow::new(frame.t, frame.truth, &est, pose_error(&est, &frame.truth)));

        if let Ok(moved) = solve_with_angle_center(&corr, model, &intr, &cfg.solver, angle_center) {
            angle_deltas.push(pose_difference(&moved.pose(), &est.pose()));
        }
        let corr_shifted = frame.pixels.center(&sim.object, &shifted);
        if let Ok(moved) = solve(&corr_shifted, model, &shifted, &cfg.solver) {
            recentered_deltas.push(pose_difference(&moved.pose(), &est.pose()));
        }
    }
    let errors: Vec<PoseError> = rows.iter().map(|r| r.error).collect();
    let summary =
        summarize(&errors).map_err(|_| CliError::Validation(format!("no frame of the {model} run could be solved")))?;
    Ok(ModelRun {
        model,
        manifest: RunManifest::new(sim, intr, cfg.solver),
        rows,
        summary,
        failed,
        not_converged,
        pp_angle: PrincipalPointStudy::new(cfg.pp_offset, angle_deltas),
        pp_recentered: PrincipalPointStudy::new(cfg.pp_offset, recentered_deltas),
    })
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, CliError> {
    if cfg.models.is_empty() {
        return Err(CliError::Validation("no models selected".into()));
    }
    if !(cfg.sigma.is_finite() && cfg.sigma >= 0.0) {
        return Err(CliError::Validation(format!("sigma must be non-negative, got {}", cfg.sigma)));
    }
    let runs = cfg.models.iter().map(|&m| run_model(cfg, m)).collect::<Result<Vec<_>, _>>()?;
    let fisheye: Vec<&ModelRun> = runs.iter().filter(|r| r.model.is_fisheye()).collect();
    let mut cross_model = Vec::new();
    for (k, a) in fisheye.iter().enumerate() {
        for b in &fisheye[k + 1..] {
            let (ma, mb) = (a.mean_errors(), b.mean_errors());
            cross_model.push(CrossModelDelta {
                a: a.model,
                b: b.model,
                mean_delta: std::array::from_fn(|c| ma[c] - mb[c]),
            });
        }
    }
    Ok(BenchReport { config: cfg.clone(), runs, cross_model })
}

/// Plain-text tables of a bench report.
pub fn format_report(report: &BenchReport) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let head: Vec<String> =
        Channel::ALL.iter().map(|c| format!("{:>12}", format!("{}[{}]", c.name(), c.unit()))).collect();
    let _ = writeln!(s, "# error summary per model (mean / median / q1 / q3)");
    for run in &report.runs {
        let _ = writeln!(
            s,
            "\n## {} ({} frames solved, {} failed, {} not converged)",
            run.model,
            run.rows.len(),
            run.failed,
            run.not_converged
        );
        let _ = writeln!(s, "{:>8}{}", "", head.join(""));
        let stats: [(&str, fn(&eposit::metrics::BoxplotSummary) -> f64); 4] =
            [("mean", |b| b.mean), ("median", |b| b.median), ("q1", |b| b.q1), ("q3", |b| b.q3)];
        for (name, get) in stats {
            let vals: Vec<String> = run.summary.channels.iter().map(|b| format!("{:>12.4}", get(b))).collect();
            let _ = writeln!(s, "{name:>8}{}", vals.join(""));
        }
    }
    let _ = writeln!(s, "\n# cross-model difference of mean errors");
    if report.cross_model.is_empty() {
        let _ = writeln!(s, "(fewer than two fish-eye models)");
    } else {
        let _ = writeln!(s, "{:>30}{}", "", head.join(""));
        for d in &report.cross_model {
            let vals: Vec<String> = d.mean_delta.iter().map(|v| format!("{v:>12.4}")).collect();
            let _ = writeln!(s, "{:>30}{}", format!("{} - {}", d.a, d.b), vals.join(""));
        }
        let vals: Vec<String> = report.max_cross_model_delta().iter().map(|v| format!("{v:>12.4}")).collect();
        let _ = writeln!(s, "{:>30}{}", "max |delta|", vals.join(""));
    }
    let [du, dv] = report.config.pp_offset;
    let studies: [(&str, fn(&ModelRun) -> &PrincipalPointStudy); 2] =
        [("incident angles only", |r| &r.pp_angle), ("incident angles and image coordinates", |r| &r.pp_recentered)];
    for (what, study) in studies {
        let _ = writeln!(s, "\n# principal point shifted by ({du}, {dv}) px for {what}: mean change of the estimates");
        let _ = writeln!(s, "{:>16}{}", "", head.join(""));
        for run in &report.runs {
            let vals: Vec<String> = study(run).mean_delta.iter().map(|v| format!("{v:>12.4}")).collect();
            let _ = writeln!(s, "{:>16}{}", run.model.name(), vals.join(""));
        }
    }
    s
}
