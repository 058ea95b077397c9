//! Persistence: raster formats, the MPI archive, trajectories, frame-pair
//! sampling and the viewer export.

pub mod archive;
pub mod pairs;
pub mod pfm;
pub mod png;
pub mod trajectory;
pub mod web;

use std::path::Path;

use crate::error::{Error, Result};
use crate::scene::{DisparityMap, DisparityUnit, ImageBuffer};

pub use archive::{load_mpi, save_mpi};
pub use pairs::{sample_training_pairs, PairSample};
pub use trajectory::{parse_trajectory, serialize_trajectory, Trajectory, TrajectoryRecord};
pub use web::export_web;

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default()
}

/// Loads a color image from PNG or 3-channel/1-channel PFM.
pub fn load_image(path: &Path) -> Result<ImageBuffer> {
    match extension(path).as_str() {
        "png" => png::load_image_png(path),
        "pfm" => {
            let p = pfm::Pfm::read(path)?;
            ImageBuffer::from_vec(p.width, p.height, p.channels, p.data)
                .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
        }
        other => Err(Error::arg(format!("unsupported image extension {other:?}"))),
    }
}

/// Loads a disparity map from PFM (read as `pfm_unit`) or 16-bit PNG (unit from its tags).
pub fn load_disparity(path: &Path, pfm_unit: DisparityUnit) -> Result<DisparityMap> {
    match extension(path).as_str() {
        "pfm" => pfm::load_disparity_pfm(path, pfm_unit),
        "png" => png::load_disparity_png(path),
        other => Err(Error::arg(format!("unsupported disparity extension {other:?}"))),
    }
}

pub fn save_disparity(path: &Path, d: &DisparityMap) -> Result<()> {
    match extension(path).as_str() {
        "pfm" => pfm::save_disparity_pfm(path, d),
        "png" => {
            let max = match d.unit() {
                DisparityUnit::Normalized => 1.0,
                DisparityUnit::InverseMeters => d.values().iter().cloned().fold(0.0, f64::max).max(1e-12),
            };
            png::save_disparity_png16(path, d, max)
        }
        other => Err(Error::arg(format!("unsupported disparity extension {other:?}"))),
    }
}
