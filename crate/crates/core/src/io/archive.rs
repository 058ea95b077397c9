//! On-disk MPI archive: a directory with `meta.json` and one 32-bit float
//! RGBA OpenEXR image per plane (`plane_0000.exr`, ... back-to-front).

use std::fs;
use std::path::Path;

use exr::prelude::{read_first_rgba_layer_from_file, write_rgba_file};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{plane_depths, CameraIntrinsics, ImageBuffer, Mpi};

pub const META_FILE: &str = "meta.json";
pub const ARCHIVE_FORMAT: &str = "mpiview-mpi";
pub const ARCHIVE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveMeta {
    pub format: String,
    pub version: u32,
    pub planes: usize,
    /// Depth schedule endpoints in meters; plane depths are equispaced in disparity.
    pub near: f64,
    pub far: f64,
    pub width: usize,
    pub height: usize,
    pub intrinsics: CameraIntrinsics,
    /// Always `"straight"`: colors are not premultiplied by alpha.
    pub alpha: String,
    pub plane_order: String,
    pub plane_files: Vec<String>,
}

pub fn plane_file_name(k: usize, ext: &str) -> String {
    format!("plane_{k:04}.{ext}")
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn save_mpi(mpi: &Mpi, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let plane_files: Vec<String> = (0..mpi.len()).map(|k| plane_file_name(k, "exr")).collect();
    let meta = ArchiveMeta {
        format: ARCHIVE_FORMAT.into(),
        version: ARCHIVE_VERSION,
        planes: mpi.len(),
        near: mpi.depths().near(),
        far: mpi.depths().far(),
        width: mpi.width(),
        height: mpi.height(),
        intrinsics: *mpi.intrinsics(),
        alpha: "straight".into(),
        plane_order: "back_to_front".into(),
        plane_files: plane_files.clone(),
    };
    for (plane, name) in mpi.planes().iter().zip(&plane_files) {
        let path = dir.join(name);
        write_rgba_file(&path, plane.width(), plane.height(), |x, y| {
            let p = plane.pixel(x, y);
            (p[0], p[1], p[2], p[3])
        })
        .map_err(|e| exr_error(&path, e))?;
    }
    write_json(&dir.join(META_FILE), &meta)
}

fn exr_error(path: &Path, e: exr::error::Error) -> Error {
    match e {
        exr::error::Error::Io(io) => Error::io(path, io),
        other => Error::parse(path.display().to_string(), other.to_string()),
    }
}

fn read_exr_rgba(path: &Path) -> Result<ImageBuffer> {
    let image = read_first_rgba_layer_from_file(
        path,
        |res, _| (res.width(), vec![0.0f32; res.width() * res.height() * 4]),
        |(w, data): &mut (usize, Vec<f32>), pos, (r, g, b, a): (f32, f32, f32, f32)| {
            let i = (pos.y() * *w + pos.x()) * 4;
            data[i..i + 4].copy_from_slice(&[r, g, b, a]);
        },
    )
    .map_err(|e| exr_error(path, e))?;
    let size = image.layer_data.size;
    let (_, data) = image.layer_data.channel_data.pixels;
    ImageBuffer::from_vec(size.width(), size.height(), 4, data)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

fn check_meta(meta: &ArchiveMeta, dir: &Path) -> Result<()> {
    let ctx = dir.join(META_FILE).display().to_string();
    if meta.format != ARCHIVE_FORMAT {
        return Err(Error::parse(ctx, format!("unknown archive format {:?}", meta.format)));
    }
    if meta.version != ARCHIVE_VERSION {
        return Err(Error::parse(
            ctx,
            format!("unsupported archive version {}", meta.version),
        ));
    }
    if meta.alpha != "straight" || meta.plane_order != "back_to_front" {
        return Err(Error::parse(
            ctx,
            "archive must hold straight alpha in back-to-front order",
        ));
    }
    if meta.plane_files.len() != meta.planes {
        return Err(Error::parse(
            ctx,
            format!(
                "meta lists {} plane files for {} planes",
                meta.plane_files.len(),
                meta.planes
            ),
        ));
    }
    let on_disk = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("plane_"))
        .count();
    if on_disk != meta.planes {
        return Err(Error::parse(
            ctx,
            format!(
                "meta declares {} planes but directory holds {on_disk} plane files",
                meta.planes
            ),
        ));
    }
    Ok(())
}

pub fn load_mpi(dir: &Path) -> Result<Mpi> {
    let meta: ArchiveMeta = read_json(&dir.join(META_FILE))?;
    check_meta(&meta, dir)?;
    let ctx = || dir.join(META_FILE).display().to_string();
    let depths = plane_depths(meta.planes, meta.near, meta.far).map_err(|e| Error::parse(ctx(), e.to_string()))?;
    let intrinsics = CameraIntrinsics::new(
        meta.intrinsics.fx,
        meta.intrinsics.fy,
        meta.intrinsics.cx,
        meta.intrinsics.cy,
    )
    .map_err(|e| Error::parse(ctx(), e.to_string()))?;
    let planes = meta
        .plane_files
        .iter()
        .map(|name| {
            let plane = read_exr_rgba(&dir.join(name))?;
            if plane.dims() != (meta.width, meta.height) {
                return Err(Error::parse(
                    dir.join(name).display().to_string(),
                    format!("plane is {:?}, meta says {}x{}", plane.dims(), meta.width, meta.height),
                ));
            }
            Ok(plane)
        })
        .collect::<Result<Vec<_>>>()?;
    Mpi::new(planes, depths, intrinsics).map_err(|e| Error::parse(ctx(), e.to_string()))
}
