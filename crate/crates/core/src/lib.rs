//! Multiplane-image (MPI) scene construction and novel-view rendering.
//!
//! An MPI is a stack of fronto-parallel RGBA planes at fixed depths in front
//! of a reference camera. This crate builds one from a color image and a
//! disparity map (deterministic half-Gaussian alphas, per-plane
//! foreground/background blending), renders it at new camera poses through
//! plane-induced homographies and the over operator, and provides the
//! single-image warping + diffusion-inpainting baseline, scale/shift
//! disparity alignment, and the file formats used by the `mpiview` CLI.
//!
//! Conventions used throughout:
//! - planes are stored back-to-front (index 0 is the farthest plane);
//! - poses are world-to-camera, right-handed, camera looking down +z;
//! - pixel `(x, y)` has its center at coordinate `(x, y)`;
//! - alpha is straight (not premultiplied).

pub mod align;
pub mod alpha;
pub mod baseline;
pub mod blend;
pub mod error;
pub mod io;
pub mod render;
pub mod scene;

pub use error::{Error, Result};
pub use scene::{
    disparity_to_plane_index, plane_depths, relative_pose, CameraIntrinsics, CameraPose, DisparityMap, DisparityUnit,
    ImageBuffer, Mpi, PlaneDepths,
};
