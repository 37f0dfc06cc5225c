use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use eposit::io_formats::{read_correspondences, read_manifest, read_results, write_results, ResultRow, RunManifest};
use eposit::metrics::pose_error;
use eposit::scene_sim::{default_camera, HelixTrajectory, NoiseSpec, SimulationConfig};
use eposit::{solve, CameraModel, Intrinsics, ObjectPointSet, PoseEstimate, SolverConfig};
use serde::Serialize;

use crate::args::{BenchArgs, IntrinsicsArgs, PlotArgs, SimulateArgs, SolveArgs};
use crate::bench::{format_report, run_bench, BenchConfig, BenchReport};
use crate::plot::{render, PlotKind};
use crate::CliError;

pub const FRAMES_FILE: &str = "frames.csv";

fn check_sigma(sigma: f64) -> Result<(), CliError> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Validation(format!("--sigma must be a non-negative number, got {sigma}")))
    }
}

/// Generating camera for `model`, with any flags overriding the defaults.
/// Setting `--f` drops the default pixel scales unless they are given too.
pub fn camera_from_flags(model: CameraModel, flags: &IntrinsicsArgs) -> Result<Intrinsics, CliError> {
    let base = default_camera(model);
    let mut intr = match flags.f {
        Some(f) => Intrinsics { f, kx: None, ky: None, ..base },
        None => base,
    };
    if let Some(u0) = flags.u0 {
        intr.u0 = u0;
    }
    if let Some(v0) = flags.v0 {
        intr.v0 = v0;
    }
    if flags.kx.is_some() {
        intr.kx = flags.kx;
    }
    if flags.ky.is_some() {
        intr.ky = flags.ky;
    }
    intr.validate()?;
    Ok(intr)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutcome {
    pub results: PathBuf,
    pub manifest: RunManifest,
    pub solved: usize,
    /// Frames the solver rejected; they are left out of the results file.
    pub failed: usize,
}

/// Simulates, solves and writes `frames.csv` plus `frames.manifest.json`.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulateOutcome, CliError> {
    let manifest = match &args.from_manifest {
        Some(path) => read_manifest(path)?,
        None => {
            check_sigma(args.sigma)?;
            if args.frames == 0 {
                return Err(CliError::Validation("--frames must be at least 1".into()));
            }
            let camera = camera_from_flags(args.model, &args.intrinsics)?;
            let solver_intr = if args.calibrated_scales { camera } else { Intrinsics { kx: None, ky: None, ..camera } };
            let sim = SimulationConfig {
                trajectory: HelixTrajectory::default(),
                object: ObjectPointSet::reference_tetrahedron(),
                model: args.model,
                camera,
                noise: NoiseSpec::new(args.sigma, args.seed),
                frames: args.frames,
                time_step: 1.0,
            };
            RunManifest::new(sim, solver_intr, SolverConfig::default())
        }
    };
    manifest.simulation.noise.validate()?;
    let sim = &manifest.simulation;
    let mut rows = Vec::with_capacity(sim.frames);
    let mut failed = 0;
    for frame in sim.run()? {
        let corr = frame.pixels.center(&sim.object, &manifest.solver_intrinsics);
        match solve(&corr, sim.model, &manifest.solver_intrinsics, &manifest.solver) {
            Ok(est) => rows.push(ResultRow::new(frame.t, frame.truth, &est, pose_error(&est, &frame.truth))),
            Err(_) => failed += 1,
        }
    }
    std::fs::create_dir_all(&args.out)?;
    let results = args.out.join(FRAMES_FILE);
    write_results(&results, &rows, &manifest)?;
    Ok(SimulateOutcome { results, solved: rows.len(), failed, manifest })
}

/// Parses `WIDTHxHEIGHT`.
pub fn parse_image_size(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Validation(format!("--image-size must look like 1600x1200, got `{s}`"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: f64 = w.trim().parse().map_err(|_| bad())?;
    let h: f64 = h.trim().parse().map_err(|_| bad())?;
    if w > 0.0 && h > 0.0 {
        Ok((w, h))
    } else {
        Err(bad())
    }
}

pub fn solve_intrinsics(args: &SolveArgs) -> Result<Intrinsics, CliError> {
    let center = args.image_size.as_deref().map(parse_image_size).transpose()?.map(|(w, h)| (w / 2.0, h / 2.0));
    let u0 = args.u0.or(center.map(|c| c.0));
    let v0 = args.v0.or(center.map(|c| c.1));
    let (Some(u0), Some(v0)) = (u0, v0) else {
        return Err(CliError::Validation("give the principal point with --u0/--v0 or --image-size".into()));
    };
    let intr = Intrinsics { f: args.f, u0, v0, kx: args.kx, ky: args.ky };
    intr.validate()?;
    Ok(intr)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub model: CameraModel,
    pub estimate: PoseEstimate,
    /// Intrinsic XYZ Euler angles (degrees).
    pub euler_deg: [f64; 3],
}

impl SolveOutcome {
    pub fn report(&self) -> String {
        let e = &self.estimate;
        let mut s = String::new();
        let _ = writeln!(s, "model: {}", self.model);
        let _ = writeln!(s, "rotation:");
        for r in 0..3 {
            let _ =
                writeln!(s, "  {:>12.8} {:>12.8} {:>12.8}", e.rotation[(r, 0)], e.rotation[(r, 1)], e.rotation[(r, 2)]);
        }
        let [a, b, c] = self.euler_deg;
        let _ = writeln!(s, "euler_xyz_deg: {a:.6} {b:.6} {c:.6}");
        let t = e.translation;
        let _ = writeln!(s, "translation_mm: {:.6} {:.6} {:.6}", t.x, t.y, t.z);
        let _ = writeln!(s, "iterations: {}", e.iterations);
        let _ = writeln!(s, "converged: {}", e.converged);
        if e.extent_exceeded {
            let _ = writeln!(s, "warning: object extent exceeds 0.1*Z0, accuracy may suffer");
        }
        s
    }
}

/// Solves one correspondence file. Non-convergence is reported through
/// `estimate.converged` rather than as an error.
pub fn cmd_solve(args: &SolveArgs) -> Result<SolveOutcome, CliError> {
    let intr = solve_intrinsics(args)?;
    let config = SolverConfig { epsilon_tol: args.epsilon, max_iters: args.max_iters, ..SolverConfig::default() };
    let corr = read_correspondences(&args.input, &intr)?;
    let estimate = solve(&corr, args.model, &intr, &config)?;
    let euler = estimate.pose().euler_xyz_deg();
    let outcome = SolveOutcome { model: args.model, euler_deg: [euler.x, euler.y, euler.z], estimate };
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&outcome).map_err(|e| CliError::Validation(e.to_string()))?;
        std::fs::write(out, json + "\n")?;
    }
    Ok(outcome)
}

pub fn bench_config(args: &BenchArgs) -> Result<BenchConfig, CliError> {
    check_sigma(args.sigma)?;
    if args.frames == 0 {
        return Err(CliError::Validation("--frames must be at least 1".into()));
    }
    let [du, dv] = args.pp_offset[..] else {
        return Err(CliError::Validation("--pp-offset takes exactly two values".into()));
    };
    let models = if args.models.is_empty() { CameraModel::ALL.to_vec() } else { args.models.clone() };
    Ok(BenchConfig {
        models,
        frames: args.frames,
        sigma: args.sigma,
        seed: args.seed,
        pp_offset: [du, dv],
        calibrated_scales: args.calibrated_scales,
        ..BenchConfig::default()
    })
}

/// Runs the benchmark; with an output directory, writes one run per model
/// plus `report.txt` and `report.json`.
pub fn cmd_bench(args: &BenchArgs) -> Result<BenchReport, CliError> {
    let report = run_bench(&bench_config(args)?)?;
    if let Some(out) = &args.out {
        for run in &report.runs {
            let dir = out.join(run.model.name());
            std::fs::create_dir_all(&dir)?;
            write_results(dir.join(FRAMES_FILE), &run.rows, &run.manifest)?;
        }
        std::fs::write(out.join("report.txt"), format_report(&report))?;
        let summary = serde_json::json!({
            "config": report.config,
            "models": report.runs.iter().map(|r| serde_json::json!({
                "model": r.model,
                "solved": r.rows.len(),
                "failed": r.failed,
                "not_converged": r.not_converged,
                "summary": r.summary,
                "pp_angle_mean_delta": r.pp_angle.mean_delta,
                "pp_angle_max_abs_delta": r.pp_angle.max_abs_delta,
                "pp_recentered_mean_delta": r.pp_recentered.mean_delta,
                "pp_recentered_max_abs_delta": r.pp_recentered.max_abs_delta,
            })).collect::<Vec<_>>(),
            "cross_model": report.cross_model,
        });
        let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Validation(e.to_string()))?;
        std::fs::write(out.join("report.json"), json + "\n")?;
    }
    Ok(report)
}

fn default_plot_path(channel: &str) -> PathBuf {
    let dir = std::env::var_os(crate::OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{channel}.svg"))
}

/// Renders the chosen channel of one or more results files to SVG.
pub fn cmd_plot(args: &PlotArgs) -> Result<PathBuf, CliError> {
    let kind: PlotKind = args.channel.parse()?;
    let mut runs = Vec::with_capacity(args.results.len());
    for path in &args.results {
        let rows = read_results(path)?;
        if rows.is_empty() {
            return Err(CliError::Validation(format!("{} holds no result rows", path.display())));
        }
        runs.push((run_label(path), rows));
    }
    let svg = render(kind, &runs)?;
    let out = args.out.clone().unwrap_or_else(|| default_plot_path(&args.channel));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&out, svg)?;
    Ok(out)
}

/// `out/equisolid/frames.csv` → `equisolid`.
fn run_label(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match path.parent().and_then(Path::file_name) {
        Some(dir) if stem == "frames" => dir.to_string_lossy().into_owned(),
        _ => stem,
    }
}
