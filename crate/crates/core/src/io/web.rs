//! Static export for the browser viewer: `meta.json` plus one 8-bit RGBA PNG
//! per plane, back-to-front.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::archive::{plane_file_name, read_json, write_json, META_FILE};
use super::png::{load_image_png, save_image_png, PngDepth};
use crate::error::{Error, Result};
use crate::scene::{plane_depths, CameraIntrinsics, Mpi};

pub const WEB_FORMAT: &str = "mpiview-web";
pub const WEB_VERSION: u32 = 1;
/// Default half-width of the viewer's translation bounds, meters.
pub const DEFAULT_VIEW_BOUND: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WebMeta {
    pub format: String,
    pub version: u32,
    pub planes: usize,
    pub width: usize,
    pub height: usize,
    pub near: f64,
    pub far: f64,
    /// Plane depths in meters, same order as `plane_files`.
    pub depths: Vec<f64>,
    pub intrinsics: CameraIntrinsics,
    pub alpha: String,
    pub plane_order: String,
    pub view_bound: f64,
    pub plane_files: Vec<String>,
}

pub fn export_web(mpi: &Mpi, dir: &Path) -> Result<WebMeta> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let plane_files: Vec<String> = (0..mpi.len()).map(|k| plane_file_name(k, "png")).collect();
    for (plane, name) in mpi.planes().iter().zip(&plane_files) {
        save_image_png(&dir.join(name), plane, PngDepth::Eight)?;
    }
    let meta = WebMeta {
        format: WEB_FORMAT.into(),
        version: WEB_VERSION,
        planes: mpi.len(),
        width: mpi.width(),
        height: mpi.height(),
        near: mpi.depths().near(),
        far: mpi.depths().far(),
        depths: mpi.depths().depths().to_vec(),
        intrinsics: *mpi.intrinsics(),
        alpha: "straight".into(),
        plane_order: "back_to_front".into(),
        view_bound: DEFAULT_VIEW_BOUND,
        plane_files,
    };
    write_json(&dir.join(META_FILE), &meta)?;
    Ok(meta)
}

/// Reads an export back (8-bit quantized planes), mirroring what the viewer loads.
pub fn load_web_export(dir: &Path) -> Result<Mpi> {
    let meta: WebMeta = read_json(&dir.join(META_FILE))?;
    let ctx = || dir.join(META_FILE).display().to_string();
    if meta.format != WEB_FORMAT || meta.version != WEB_VERSION {
        return Err(Error::parse(ctx(), "not an mpiview web export"));
    }
    if meta.plane_files.len() != meta.planes || meta.depths.len() != meta.planes {
        return Err(Error::parse(ctx(), "plane count disagrees with plane list"));
    }
    let depths = plane_depths(meta.planes, meta.near, meta.far).map_err(|e| Error::parse(ctx(), e.to_string()))?;
    let planes = meta
        .plane_files
        .iter()
        .map(|name| {
            let p = load_image_png(&dir.join(name))?;
            if p.dims() != (meta.width, meta.height) || p.channels() != 4 {
                return Err(Error::parse(
                    dir.join(name).display().to_string(),
                    "plane shape mismatch",
                ));
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Mpi::new(planes, depths, meta.intrinsics).map_err(|e| Error::parse(ctx(), e.to_string()))
}
