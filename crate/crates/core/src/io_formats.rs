//! Text file formats.
//!
//! **Correspondences** are comma-separated with a header naming the columns
//! `label,du,dv,dw,u,v` (any order). `du,dv,dw` are object coordinates in mm,
//! `u,v` raw pixel coordinates. Exactly one row is labelled `M0`; object
//! offsets are taken relative to it. Lines starting with `#` are ignored.
//!
//! ```text
//! label,du,dv,dw,u,v
//! M0,0,0,0,883.1,714.9
//! A,200,0,0,935.7,716.0
//! ```
//!
//! **Results** hold one row per frame in a fixed column order (see
//! [`RESULTS_HEADER`]); reals carry 9 significant digits. Each results file
//! has a JSON [`RunManifest`] next to it.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera_models::Intrinsics;
use crate::metrics::{PoseError, EULER_CONVENTION};
use crate::pose::Pose;
use crate::scene_sim::{PixelObservation, SimulationConfig, RNG_ALGORITHM};
use crate::solver::{CorrespondenceSet, ObjectPointSet, PoseEstimate, SolverConfig};

pub const FORMAT_VERSION: u32 = 1;

/// Minimum number of points (reference included) in a correspondence file.
pub const MIN_POINTS: usize = 4;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("manifest format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u32 },
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

fn parse_err(line: u64, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line, message: message.into() }
}

/// Writes `contents` through a temporary file in the destination directory
/// and renames it into place.
fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

const CORR_COLUMNS: [&str; 6] = ["label", "du", "dv", "dw", "u", "v"];

pub fn read_correspondences(path: impl AsRef<Path>, intr: &Intrinsics) -> Result<CorrespondenceSet, FormatError> {
    parse_correspondences(File::open(path)?, intr)
}

pub fn parse_correspondences(reader: impl Read, intr: &Intrinsics) -> Result<CorrespondenceSet, FormatError> {
    let mut rdr =
        csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(false).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(&e))?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(parse_err(1, "missing header row"));
    }
    let mut idx = [0usize; 6];
    for (slot, name) in idx.iter_mut().zip(CORR_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| parse_err(1, format!("header is missing column `{name}`")))?;
    }

    let mut reference: Option<(Vector3<f64>, [f64; 2])> = None;
    let mut others: Vec<(Vector3<f64>, [f64; 2])> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |k: usize| -> Result<f64, FormatError> {
            let raw = &record[idx[k]];
            let v: f64 =
                raw.parse().map_err(|_| parse_err(line, format!("`{raw}` is not a number ({})", CORR_COLUMNS[k])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line, format!("non-finite value in column {}", CORR_COLUMNS[k])))
            }
        };
        let obj = Vector3::new(num(1)?, num(2)?, num(3)?);
        let px = [num(4)?, num(5)?];
        if record[idx[0]].eq_ignore_ascii_case("M0") {
            if reference.is_some() {
                return Err(parse_err(line, "more than one M0 row"));
            }
            reference = Some((obj, px));
        } else {
            others.push((obj, px));
        }
    }

    let total = others.len() + usize::from(reference.is_some());
    if total == 0 {
        return Err(parse_err(1, "no data rows"));
    }
    let (origin, ref_px) = reference.ok_or_else(|| FormatError::Validation("no row labelled M0".into()))?;
    if total < MIN_POINTS {
        return Err(FormatError::Validation(format!("need at least {MIN_POINTS} points, got {total}")));
    }
    let object = ObjectPointSet::new(others.iter().map(|(p, _)| p - origin).collect())
        .map_err(|e| FormatError::Validation(e.to_string()))?;
    let pixels = PixelObservation { reference: ref_px, points: others.iter().map(|(_, px)| *px).collect() };
    Ok(pixels.center(&object, intr))
}

fn csv_err(e: &csv::Error) -> FormatError {
    let line = e.position().map_or(0, |p| p.line());
    parse_err(line, e.to_string())
}

/// Writes a correspondence file with `M0` at the object origin.
pub fn write_correspondences(
    path: impl AsRef<Path>,
    object: &ObjectPointSet,
    pixels: &PixelObservation,
) -> Result<(), FormatError> {
    if pixels.points.len() != object.len() {
        return Err(FormatError::Validation("pixel and object counts differ".into()));
    }
    write_atomic(path.as_ref(), |w| {
        writeln!(w, "{}", CORR_COLUMNS.join(","))?;
        writeln!(w, "M0,0,0,0,{},{}", pixels.reference[0], pixels.reference[1])?;
        for (k, (o, p)) in object.offsets().iter().zip(&pixels.points).enumerate() {
            writeln!(w, "P{},{},{},{},{},{}", k + 1, o.x, o.y, o.z, p[0], p[1])?;
        }
        Ok(())
    })?;
    Ok(())
}

/// Column names of a results file, in order.
pub fn results_header() -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for prefix in ["truth", "est"] {
        for r in 0..3 {
            for c in 0..3 {
                cols.push(format!("{prefix}_r{r}{c}"));
            }
        }
        for a in ["tx", "ty", "tz"] {
            cols.push(format!("{prefix}_{a}"));
        }
    }
    for c in crate::metrics::Channel::ALL {
        cols.push(format!("err_{}", c.name()));
    }
    cols.push("iterations".into());
    cols.push("converged".into());
    cols
}

/// Number of columns in a results row.
pub const RESULTS_COLUMNS: usize = 1 + 12 + 12 + 6 + 2;

/// Header line of a results file.
pub static RESULTS_HEADER: std::sync::LazyLock<String> = std::sync::LazyLock::new(|| results_header().join(","));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub t: f64,
    pub truth: Pose,
    pub estimate: Pose,
    pub error: PoseError,
    pub iterations: usize,
    pub converged: bool,
}

impl ResultRow {
    pub fn new(t: f64, truth: Pose, estimate: &PoseEstimate, error: PoseError) -> Self {
        Self {
            t,
            truth,
            estimate: estimate.pose(),
            error,
            iterations: estimate.iterations,
            converged: estimate.converged,
        }
    }
}

fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn write_results(path: impl AsRef<Path>, rows: &[ResultRow], manifest: &RunManifest) -> Result<(), FormatError> {
    let path = path.as_ref();
    write_atomic(path, |w| {
        writeln!(w, "{}", *RESULTS_HEADER)?;
        for row in rows {
            let mut fields = Vec::with_capacity(RESULTS_COLUMNS);
            fields.push(sig9(row.t));
            fields.extend(row.truth.to_array().iter().map(|&v| sig9(v)));
            fields.extend(row.estimate.to_array().iter().map(|&v| sig9(v)));
            fields.extend(row.error.to_array().iter().map(|&v| sig9(v)));
            fields.push(row.iterations.to_string());
            fields.push(u8::from(row.converged).to_string());
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    })?;
    write_manifest(manifest_path(path), manifest)
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>, FormatError> {
    parse_results(File::open(path)?)
}

pub fn parse_results(reader: impl Read) -> Result<Vec<ResultRow>, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(&e))?.clone();
    let expected = results_header();
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(parse_err(1, "results header does not match the expected column order"));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |k: usize| -> Result<f64, FormatError> {
            record[k].parse().map_err(|_| parse_err(line, format!("column {} is not a number", expected[k])))
        };
        let mut truth = [0.0; 12];
        let mut est = [0.0; 12];
        let mut err = [0.0; 6];
        for k in 0..12 {
            truth[k] = num(1 + k)?;
            est[k] = num(13 + k)?;
        }
        for (k, e) in err.iter_mut().enumerate() {
            *e = num(25 + k)?;
        }
        let iterations = record[31].parse().map_err(|_| parse_err(line, "iterations is not an integer"))?;
        let converged = match &record[32] {
            "1" => true,
            "0" => false,
            other => return Err(parse_err(line, format!("converged must be 0 or 1, got `{other}`"))),
        };
        rows.push(ResultRow {
            t: num(0)?,
            truth: Pose::from_array(&truth),
            estimate: Pose::from_array(&est),
            error: PoseError::from_array(&err),
            iterations,
            converged,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub euler: String,
    pub rng: String,
    pub pose: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            euler: EULER_CONVENTION.into(),
            rng: RNG_ALGORITHM.into(),
            pose: "x_cam = R * x_obj + T; T is the reference point in camera coordinates".into(),
        }
    }
}

/// Everything needed to regenerate a simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub generator: String,
    pub simulation: SimulationConfig,
    /// Intrinsics handed to the solver, which may differ from the generating camera.
    pub solver_intrinsics: Intrinsics,
    pub solver: SolverConfig,
    pub conventions: Conventions,
}

impl RunManifest {
    pub fn new(simulation: SimulationConfig, solver_intrinsics: Intrinsics, solver: SolverConfig) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            generator: concat!("eposit ", env!("CARGO_PKG_VERSION")).into(),
            simulation,
            solver_intrinsics,
            solver,
            conventions: Conventions::default(),
        }
    }
}

/// `frames.csv` → `frames.manifest.json`.
pub fn manifest_path(results: &Path) -> PathBuf {
    results.with_extension("manifest.json")
}

pub fn write_manifest(path: impl AsRef<Path>, manifest: &RunManifest) -> Result<(), FormatError> {
    let json = serde_json::to_string_pretty(manifest)?;
    write_atomic(path.as_ref(), |w| writeln!(w, "{json}"))?;
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<RunManifest, FormatError> {
    parse_manifest(&std::fs::read_to_string(path)?)
}

pub fn parse_manifest(text: &str) -> Result<RunManifest, FormatError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| FormatError::Validation("manifest has no format_version".into()))?;
    if found != u64::from(FORMAT_VERSION) {
        return Err(FormatError::VersionMismatch { found, expected: FORMAT_VERSION });
    }
    Ok(serde_json::from_value(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera_models::CameraModel;
    use crate::scene_sim::{fisheye_camera, HelixTrajectory, NoiseSpec};

    fn intr0() -> Intrinsics {
        Intrinsics::new(541.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn reads_reference_tetrahedron() {
        let text = "\
# synthetic
label,du,dv,dw,u,v
M0,0,0,0,100,50
A,200,0,0,150,51
B,0,200,0,99,110
C,0,0,-50,101,49
";
        let corr = parse_correspondences(text.as_bytes(), &Intrinsics::new(541.0, 100.0, 50.0).unwrap()).unwrap();
        assert_eq!(corr.len(), 3);
        assert_eq!(corr.object, ObjectPointSet::reference_tetrahedron());
        assert_eq!(corr.image_ref.x, 0.0);
        assert_eq!(corr.image_pts[0].x, 50.0);
    }

    #[test]
    fn reference_row_may_be_anywhere_and_offset() {
        let text = "u,v,label,du,dv,dw\n1,2,A,210,10,5\n3,4,M0,10,10,5\n5,6,B,10,210,5\n7,8,C,10,10,-45\n";
        let corr = parse_correspondences(text.as_bytes(), &intr0()).unwrap();
        assert_eq!(corr.object, ObjectPointSet::reference_tetrahedron());
        assert_eq!((corr.image_ref.x, corr.image_ref.y), (3.0, 4.0));
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        assert!(matches!(parse_correspondences(&b""[..], &intr0()), Err(FormatError::Parse { .. })));
        let header_only = "label,du,dv,dw,u,v\n";
        assert!(matches!(parse_correspondences(header_only.as_bytes(), &intr0()), Err(FormatError::Parse { .. })));
    }

    #[test]
    fn bad_number_reports_line() {
        let text = "label,du,dv,dw,u,v\nM0,0,0,0,1,1\nA,1,0,0,x,1\n";
        match parse_correspondences(text.as_bytes(), &intr0()) {
            Err(FormatError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_few_points() {
        let text = "label,du,dv,dw,u,v\nM0,0,0,0,1,1\nA,1,0,0,2,1\nB,0,1,0,1,2\n";
        assert!(matches!(parse_correspondences(text.as_bytes(), &intr0()), Err(FormatError::Validation(_))));
    }

    #[test]
    fn missing_reference_or_duplicate() {
        let text = "label,du,dv,dw,u,v\nA,0,0,0,1,1\nB,1,0,0,2,1\nC,0,1,0,1,2\nD,0,0,1,3,3\n";
        assert!(matches!(parse_correspondences(text.as_bytes(), &intr0()), Err(FormatError::Validation(_))));
        let text = "label,du,dv,dw,u,v\nM0,0,0,0,1,1\nM0,1,0,0,2,1\nC,0,1,0,1,2\nD,0,0,1,3,3\n";
        assert!(matches!(parse_correspondences(text.as_bytes(), &intr0()), Err(FormatError::Parse { line: 3, .. })));
    }

    #[test]
    fn missing_column() {
        let text = "label,du,dv,u,v\nM0,0,0,1,1\n";
        assert!(matches!(parse_correspondences(text.as_bytes(), &intr0()), Err(FormatError::Parse { .. })));
    }

    #[test]
    fn ten_points_accepted() {
        let mut text = String::from("label,du,dv,dw,u,v\nM0,0,0,0,0,0\n");
        for k in 1..10 {
            text.push_str(&format!("P{k},{},{},{},{},{}\n", k * 10, (k * 7) % 13, (k * k) % 5, k, -k));
        }
        let corr = parse_correspondences(text.as_bytes(), &intr0()).unwrap();
        assert_eq!(corr.len(), 9);
    }

    fn manifest() -> RunManifest {
        RunManifest::new(
            SimulationConfig {
                trajectory: HelixTrajectory::default(),
                object: ObjectPointSet::reference_tetrahedron(),
                model: CameraModel::Equidistance,
                camera: fisheye_camera(),
                noise: NoiseSpec::new(0.4, 7),
                frames: 360,
                time_step: 1.0,
            },
            Intrinsics::new(541.0, 782.41, 613.71).unwrap(),
            SolverConfig::default(),
        )
    }

    #[test]
    fn manifest_round_trip_and_version_check() {
        let m = manifest();
        let text = serde_json::to_string_pretty(&m).unwrap();
        assert_eq!(parse_manifest(&text).unwrap(), m);
        let bumped = text.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(parse_manifest(&bumped), Err(FormatError::VersionMismatch { found: 2, expected: 1 })));
    }

    #[test]
    fn header_only_results_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frames.csv");
        write_results(&path, &[], &manifest()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{}\n", *RESULTS_HEADER));
        assert!(read_results(&path).unwrap().is_empty());
        assert_eq!(read_manifest(manifest_path(&path)).unwrap(), manifest());
        assert_eq!(results_header().len(), RESULTS_COLUMNS);
    }

    #[test]
    fn exact_estimate_writes_zero_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frames.csv");
        let truth = crate::scene_sim::helix_pose(&HelixTrajectory::default(), 12.0).unwrap();
        let est = PoseEstimate {
            rotation: truth.rotation,
            translation: truth.translation,
            iterations: 4,
            converged: true,
            epsilon_final: 0.0,
            extent_exceeded: false,
        };
        let row = ResultRow::new(12.0, truth, &est, crate::metrics::pose_error(&est, &truth));
        write_results(&path, &[row], &manifest()).unwrap();
        let back = read_results(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].error, PoseError::zero());
        assert_eq!((back[0].iterations, back[0].converged), (4, true));
    }

    #[test]
    fn correspondence_writer_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let object = ObjectPointSet::reference_tetrahedron();
        let px = PixelObservation {
            reference: [800.5, 600.25],
            points: vec![[850.0, 601.0], [799.0, 650.0], [801.0, 599.0]],
        };
        write_correspondences(&path, &object, &px).unwrap();
        let intr = Intrinsics::new(541.0, 800.0, 600.0).unwrap();
        let corr = read_correspondences(&path, &intr).unwrap();
        assert_eq!(corr, px.center(&object, &intr));
    }
}
