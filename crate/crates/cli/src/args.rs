use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use eposit::CameraModel;

use crate::OUT_DIR_ENV;

#[derive(Debug, Parser)]
#[command(name = "eposit", version, about = "Pose estimation for pinhole and fish-eye cameras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a helix run, solve every frame and write frames.csv plus its manifest.
    Simulate(SimulateArgs),
    /// Estimate the pose from a correspondence file.
    Solve(SolveArgs),
    /// Run the helix benchmark over several camera models.
    Bench(BenchArgs),
    /// Render a results file as an SVG plot.
    Plot(PlotArgs),
}

/// Camera intrinsics flags. Unset values fall back to the model's default camera.
#[derive(Debug, Clone, Default, Args)]
pub struct IntrinsicsArgs {
    /// Focal length (pixels).
    #[arg(long)]
    pub f: Option<f64>,
    /// Principal point, x (pixels).
    #[arg(long)]
    pub u0: Option<f64>,
    /// Principal point, y (pixels).
    #[arg(long)]
    pub v0: Option<f64>,
    /// Calibrated scale along x (pixels); defaults to `f`.
    #[arg(long)]
    pub kx: Option<f64>,
    /// Calibrated scale along y (pixels); defaults to `f`.
    #[arg(long)]
    pub ky: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value = "equidistance")]
    pub model: CameraModel,
    #[command(flatten)]
    pub intrinsics: IntrinsicsArgs,
    #[arg(long, default_value_t = 360)]
    pub frames: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Standard deviation of the pixel noise.
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    pub sigma: f64,
    /// Give the solver the calibrated scales instead of only `f`.
    #[arg(long)]
    pub calibrated_scales: bool,
    /// Re-run the configuration recorded in a manifest; other scene flags are ignored.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
}

impl SimulateArgs {
    pub fn new(model: CameraModel, out: impl Into<PathBuf>) -> Self {
        Self {
            model,
            intrinsics: IntrinsicsArgs::default(),
            frames: 360,
            seed: 1,
            sigma: 0.4,
            calibrated_scales: false,
            from_manifest: None,
            out: out.into(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Correspondence CSV (label,du,dv,dw,u,v).
    pub input: PathBuf,
    #[arg(long, default_value = "perspective")]
    pub model: CameraModel,
    #[arg(long)]
    pub f: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    #[arg(long)]
    pub kx: Option<f64>,
    #[arg(long)]
    pub ky: Option<f64>,
    /// Image size `WIDTHxHEIGHT`; its center is the principal point when --u0/--v0 are absent.
    #[arg(long)]
    pub image_size: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iters: usize,
    /// Write the estimate as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SolveArgs {
    pub fn new(input: impl Into<PathBuf>, model: CameraModel, f: f64, u0: f64, v0: f64) -> Self {
        Self {
            input: input.into(),
            model,
            f,
            u0: Some(u0),
            v0: Some(v0),
            kx: None,
            ky: None,
            image_size: None,
            epsilon: 1e-6,
            max_iters: 50,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated models; default is all five.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<CameraModel>,
    #[arg(long, default_value_t = 360)]
    pub frames: usize,
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Principal-point shift `DU,DV` (pixels) for the robustness study.
    #[arg(long, value_delimiter = ',', default_values_t = [20.0, 15.0], allow_negative_numbers = true)]
    pub pp_offset: Vec<f64>,
    #[arg(long)]
    pub calibrated_scales: bool,
    /// Output directory; one subdirectory per model plus report.txt and report.json.
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
}

impl Default for BenchArgs {
    fn default() -> Self {
        Self {
            models: Vec::new(),
            frames: 360,
            sigma: 0.4,
            seed: 1,
            pp_offset: vec![20.0, 15.0],
            calibrated_scales: false,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Results CSV files; boxplots draw one group per file.
    #[arg(required = true)]
    pub results: Vec<PathBuf>,
    /// rot_x, rot_y, rot_z, trans_x, trans_y, trans_z, boxplot_rot or boxplot_trans.
    #[arg(long)]
    pub channel: String,
    /// Output SVG path; defaults to `<channel>.svg` in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
