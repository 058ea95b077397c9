//! Novel-view rendering of an MPI.
//!
//! Every plane is mapped into the target camera by the homography its
//! fronto-parallel plane induces, resampled bilinearly (backward, target to
//! source) and over-composited back-to-front. Samples that fall outside a
//! source plane are transparent black.

mod path;

pub use path::{circle_path, grid_path, zoom_path, CameraPath, PathKind};

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scene::{CameraIntrinsics, CameraPose, ImageBuffer, Mpi};

/// 3×3 projective map from target pixel coordinates to source pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: Matrix3<f64>,
}

impl Homography {
    pub fn identity() -> Self {
        Self { m: Matrix3::identity() }
    }

    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::degenerate("homography has non-finite entries"));
        }
        if m.determinant().abs() <= 1e-12 {
            return Err(Error::degenerate("homography is singular"));
        }
        Ok(Self { m })
    }

    /// Integer or sub-pixel translation: target `(x, y)` samples source `(x - dx, y - dy)`.
    pub fn translation(dx: f64, dy: f64) -> Self {
        Self {
            m: Matrix3::new(1.0, 0.0, -dx, 0.0, 1.0, -dy, 0.0, 0.0, 1.0),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// Source position of target pixel `(x, y)`, or `None` when the target ray
    /// meets the plane behind the camera.
    #[inline]
    pub fn map(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let m = &self.m;
        let w = m[(2, 0)] * x + m[(2, 1)] * y + m[(2, 2)];
        if w <= 0.0 {
            return None;
        }
        let u = m[(0, 0)] * x + m[(0, 1)] * y + m[(0, 2)];
        let v = m[(1, 0)] * x + m[(1, 1)] * y + m[(1, 2)];
        Some((u / w, v / w))
    }
}

/// Homography induced by the source fronto-parallel plane `z = depth`.
///
/// With `rel` mapping source camera coordinates to target camera coordinates
/// (`X_t = R X_s + t`), points on the plane satisfy `X_t = (R + t nᵀ / depth) X_s`
/// with `n = (0, 0, 1)`. The returned map is the inverse of
/// `K_t (R + t nᵀ / depth) K_s⁻¹`, i.e. target pixels to source pixels.
pub fn plane_homography(
    intr_s: &CameraIntrinsics,
    intr_t: &CameraIntrinsics,
    rel: &CameraPose,
    depth: f64,
) -> Result<Homography> {
    if !(depth > 0.0 && depth.is_finite()) {
        return Err(Error::arg(format!("plane depth must be positive, got {depth}")));
    }
    if rel.is_identity() && intr_s == intr_t {
        return Ok(Homography::identity());
    }
    let r = rel.rotation();
    let t = rel.translation();
    // det(R + t nᵀ/d) = 1 + (Rᵀ t)_z / d; zero when the target center lies on the plane
    let lemma = 1.0 + (r.transpose() * t).z / depth;
    if lemma.abs() <= 1e-12 {
        return Err(Error::degenerate(format!(
            "target camera lies on the plane at depth {depth}"
        )));
    }
    let plane_map = r + t * Vector3::z().transpose() / depth;
    let forward = intr_t.matrix() * plane_map * intr_s.inverse_matrix();
    let inverse = forward
        .try_inverse()
        .ok_or_else(|| Error::degenerate(format!("plane homography at depth {depth} is singular")))?;
    Homography::new(inverse)
}

/// Bilinear RGBA sample with transparent-black padding, clamped to `[0, 1]`.
#[inline]
pub(crate) fn sample_rgba(plane: &ImageBuffer, u: f64, v: f64) -> [f32; 4] {
    let (w, h) = (plane.width() as f64, plane.height() as f64);
    if !(u > -1.0 && v > -1.0 && u < w && v < h) {
        return [0.0; 4];
    }
    let x0f = u.floor();
    let y0f = v.floor();
    let fx = (u - x0f) as f32;
    let fy = (v - y0f) as f32;
    let x0 = x0f as isize;
    let y0 = y0f as isize;
    let taps = [
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x0 + 1, y0, fx * (1.0 - fy)),
        (x0, y0 + 1, (1.0 - fx) * fy),
        (x0 + 1, y0 + 1, fx * fy),
    ];
    let (pw, ph) = (plane.width() as isize, plane.height() as isize);
    let mut out = [0.0f32; 4];
    for (x, y, wt) in taps {
        if x < 0 || y < 0 || x >= pw || y >= ph {
            continue;
        }
        let px = plane.pixel(x as usize, y as usize);
        for c in 0..4 {
            out[c] += wt * px[c];
        }
    }
    for v in &mut out {
        *v = v.clamp(0.0, 1.0);
    }
    out
}

/// Backward-warps an RGBA plane into a `out_size = (width, height)` raster.
pub fn warp_plane(plane: &ImageBuffer, h: &Homography, out_size: (usize, usize)) -> Result<ImageBuffer> {
    if plane.channels() != 4 {
        return Err(Error::arg("warp_plane expects an RGBA plane"));
    }
    let (ow, oh) = out_size;
    let mut data = vec![0.0f32; ow * oh * 4];
    data.par_chunks_mut(ow * 4).enumerate().for_each(|(y, row)| {
        for x in 0..ow {
            if let Some((u, v)) = h.map(x as f64, y as f64) {
                row[x * 4..x * 4 + 4].copy_from_slice(&sample_rgba(plane, u, v));
            }
        }
    });
    Ok(ImageBuffer::from_raw(ow, oh, 4, data))
}

#[inline(always)]
fn over(acc: &mut [f32], rgba: &[f32]) {
    let a = rgba[3];
    for c in 0..3 {
        acc[c] = rgba[c] * a + acc[c] * (1.0 - a);
    }
}

/// Back-to-front over operator: `C ← rgb_k α_k + C (1 − α_k)`, starting from black.
pub fn over_composite(planes: &[ImageBuffer]) -> Result<ImageBuffer> {
    let first = planes
        .first()
        .ok_or_else(|| Error::arg("over_composite needs at least one plane"))?;
    let (w, h) = first.dims();
    if let Some(p) = planes.iter().find(|p| p.dims() != (w, h) || p.channels() != 4) {
        return Err(Error::arg(format!(
            "plane {:?}x{} does not match {w}x{h} RGBA",
            p.dims(),
            p.channels()
        )));
    }
    let mut data = vec![0.0f32; w * h * 3];
    data.par_chunks_mut(w * 3).enumerate().for_each(|(y, row)| {
        for plane in planes {
            for (acc, px) in row.chunks_exact_mut(3).zip(plane.row(y).chunks_exact(4)) {
                over(acc, px);
            }
        }
        clamp_unit(row);
    });
    Ok(ImageBuffer::from_raw(w, h, 3, data))
}

fn clamp_unit(row: &mut [f32]) {
    for v in row {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Renders `mpi` from a camera at `target` (relative to the MPI's reference
/// camera) with intrinsics `intr_t` into an RGB image of `out_size`.
///
/// Equivalent to `warp_plane` on every plane followed by `over_composite`,
/// fused row by row so no warped planes are materialized.
pub fn render_novel_view(
    mpi: &Mpi,
    target: &CameraPose,
    intr_t: &CameraIntrinsics,
    out_size: (usize, usize),
) -> Result<ImageBuffer> {
    let homographies = mpi
        .depths()
        .depths()
        .iter()
        .map(|&d| plane_homography(mpi.intrinsics(), intr_t, target, d))
        .collect::<Result<Vec<_>>>()?;
    let (ow, oh) = out_size;
    let mut data = vec![0.0f32; ow * oh * 3];
    data.par_chunks_mut(ow * 3).enumerate().for_each(|(y, row)| {
        let yf = y as f64;
        for (plane, h) in mpi.planes().iter().zip(&homographies) {
            for (x, acc) in row.chunks_exact_mut(3).enumerate() {
                if let Some((u, v)) = h.map(x as f64, yf) {
                    over(acc, &sample_rgba(plane, u, v));
                }
            }
        }
        clamp_unit(row);
    });
    Ok(ImageBuffer::from_raw(ow, oh, 3, data))
}

/// Renders at `target` with the MPI's own intrinsics and resolution.
pub fn render_at(mpi: &Mpi, target: &CameraPose) -> Result<ImageBuffer> {
    render_novel_view(mpi, target, mpi.intrinsics(), (mpi.width(), mpi.height()))
}
