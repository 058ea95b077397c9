//! Shared domain types: rasters, cameras, plane schedules and the MPI itself.

mod camera;
mod image;
mod mpi;
mod planes;

pub use camera::{relative_pose, CameraIntrinsics, CameraPose};
pub use image::{DisparityMap, DisparityUnit, ImageBuffer};
pub use mpi::Mpi;
pub use planes::{disparity_to_plane_index, plane_depths, PlaneDepths};

pub(crate) use planes::nearest_plane;
