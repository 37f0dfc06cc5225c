//! Pose and reprojection error metrics, and Tukey boxplot summaries.
//!
//! Rotation errors are per-axis differences of intrinsic XYZ Euler angles,
//! the same decomposition the simulator uses to generate poses.

use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera_models::{CameraModel, DomainError, Intrinsics};
use crate::pose::{wrap_deg, Pose};
use crate::solver::{CorrespondenceSet, PoseEstimate};

/// Euler decomposition recorded in run metadata.
pub const EULER_CONVENTION: &str = "intrinsic XYZ: R = Rx(a) * Ry(b) * Rz(c)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("cannot summarize an empty error list")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseError {
    /// Per-axis Euler angle error (degrees), wrapped to `(−180, 180]`.
    pub rot_err: Vector3<f64>,
    /// Translation error (mm).
    pub trans_err: Vector3<f64>,
}

impl PoseError {
    pub fn zero() -> Self {
        Self { rot_err: Vector3::zeros(), trans_err: Vector3::zeros() }
    }

    pub fn channel(&self, c: Channel) -> f64 {
        match c {
            Channel::RotX => self.rot_err.x,
            Channel::RotY => self.rot_err.y,
            Channel::RotZ => self.rot_err.z,
            Channel::TransX => self.trans_err.x,
            Channel::TransY => self.trans_err.y,
            Channel::TransZ => self.trans_err.z,
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        Channel::ALL.map(|c| self.channel(c))
    }

    pub fn from_array(v: &[f64; 6]) -> Self {
        Self { rot_err: Vector3::new(v[0], v[1], v[2]), trans_err: Vector3::new(v[3], v[4], v[5]) }
    }
}

/// `estimate − truth`, per Euler angle and per translation axis.
pub fn pose_difference(estimate: &Pose, truth: &Pose) -> PoseError {
    let e = estimate.euler_xyz_deg();
    let t = truth.euler_xyz_deg();
    PoseError {
        rot_err: Vector3::new(wrap_deg(e.x - t.x), wrap_deg(e.y - t.y), wrap_deg(e.z - t.z)),
        trans_err: estimate.translation - truth.translation,
    }
}

pub fn pose_error(estimate: &PoseEstimate, truth: &Pose) -> PoseError {
    pose_difference(&estimate.pose(), truth)
}

/// RMS image distance (pixels) between the measured points, reference
/// included, and the object points re-projected under `estimate`.
pub fn reprojection_error(
    corr: &CorrespondenceSet,
    estimate: &PoseEstimate,
    model: CameraModel,
    intr: &Intrinsics,
) -> Result<f64, DomainError> {
    let pose = estimate.pose();
    let mut sum = 0.0;
    let reference = std::iter::once((Vector3::zeros(), &corr.image_ref));
    let points = corr.object.offsets().iter().copied().zip(&corr.image_pts);
    let mut count = 0usize;
    for (offset, measured) in reference.chain(points) {
        let p = model.project(intr, &pose.transform(&offset))?;
        sum += (p.x - measured.x).powi(2) + (p.y - measured.y).powi(2);
        count += 1;
    }
    Ok((sum / count as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    RotX,
    RotY,
    RotZ,
    TransX,
    TransY,
    TransZ,
}

impl Channel {
    pub const ALL: [Channel; 6] =
        [Channel::RotX, Channel::RotY, Channel::RotZ, Channel::TransX, Channel::TransY, Channel::TransZ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::RotX => "rot_x",
            Channel::RotY => "rot_y",
            Channel::RotZ => "rot_z",
            Channel::TransX => "trans_x",
            Channel::TransY => "trans_y",
            Channel::TransZ => "trans_z",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Channel::RotX | Channel::RotY | Channel::RotZ => "deg",
            _ => "mm",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub mean: f64,
    pub outlier_count: usize,
    pub count: usize,
}

/// Type-7 (linear interpolation) quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Tukey boxplot statistics with `1.5·IQR` whiskers.
pub fn boxplot(values: &[f64]) -> Result<BoxplotSummary, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = sorted.iter().copied().filter(|v| (fence_lo..=fence_hi).contains(v));
    let (whisker_lo, whisker_hi) =
        inside.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let outlier_count = sorted.iter().filter(|v| !(fence_lo..=fence_hi).contains(*v)).count();
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    Ok(BoxplotSummary { median, q1, q3, whisker_lo, whisker_hi, mean, outlier_count, count: sorted.len() })
}

/// One boxplot per error channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub channels: [BoxplotSummary; 6],
}

impl ErrorSummary {
    pub fn get(&self, c: Channel) -> &BoxplotSummary {
        &self.channels[c.index()]
    }
}

pub fn summarize(errors: &[PoseError]) -> Result<ErrorSummary, MetricsError> {
    if errors.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut out = Vec::with_capacity(6);
    for c in Channel::ALL {
        let v: Vec<f64> = errors.iter().map(|e| e.channel(c)).collect();
        out.push(boxplot(&v)?);
    }
    Ok(ErrorSummary { channels: out.try_into().expect("six channels") })
}
