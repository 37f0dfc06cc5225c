//! Extended POSIT: pose from orthography and scaling with iteration for
//! pinhole and radially symmetric fish-eye cameras.
//!
//! The crate is split into
//! - [`camera_models`]: forward/inverse radial projection and the `G(θ)` ratio,
//! - [`solver`]: the iterative pose solver and classic POSIT,
//! - [`scene_sim`]: a seeded helix-trajectory scene generator,
//! - [`metrics`]: pose and reprojection errors with boxplot summaries,
//! - [`io_formats`]: correspondence, results and manifest files.

pub mod camera_models;
pub mod io_formats;
pub mod metrics;
pub mod pose;
pub mod scene_sim;
pub mod solver;

pub use camera_models::{CameraModel, CenteredImagePoint, DomainError, Intrinsics};
pub use pose::Pose;
pub use solver::{
    build_object_matrix, compute_rhs, posit_classic, solve, solve_with_angle_center, CorrespondenceSet, ObjectPointSet,
    PoseEstimate, SolveError, SolverConfig, SolverState,
};
