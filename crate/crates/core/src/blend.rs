//! MPI assembly: per-plane foreground/background color blending and alpha attachment.

use rayon::prelude::*;

use crate::alpha::{alpha_from_disparity, AlphaVolume, HalfGaussian};
use crate::error::{Error, Result};
use crate::scene::{CameraIntrinsics, DisparityMap, ImageBuffer, Mpi, PlaneDepths};

/// Per-plane, per-pixel mixing weights between foreground and background color.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendWeights {
    planes: usize,
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl BlendWeights {
    /// `values` is `K × H × W`, back-to-front.
    pub fn new(planes: usize, width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != planes * width * height {
            return Err(Error::arg(format!(
                "{} weights for {planes} planes of {width}x{height}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::arg(format!("blend weight {bad} outside [0, 1]")));
        }
        Ok(Self {
            planes,
            width,
            height,
            values,
        })
    }

    pub fn constant(planes: usize, width: usize, height: usize, w: f32) -> Result<Self> {
        Self::new(planes, width, height, vec![w; planes * width * height])
    }

    pub fn num_planes(&self) -> usize {
        self.planes
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn plane(&self, k: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.values[k * n..(k + 1) * n]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}

/// Plane `k` color: `w_k * fg + (1 - w_k) * bg`.
pub fn blend_planes(fg: &ImageBuffer, bg: &ImageBuffer, w: &BlendWeights) -> Result<Vec<ImageBuffer>> {
    if fg.channels() != 3 || bg.channels() != 3 {
        return Err(Error::arg("foreground and background must be RGB"));
    }
    if fg.dims() != bg.dims() || fg.dims() != w.dims() {
        return Err(Error::arg(format!(
            "shape mismatch: fg {:?}, bg {:?}, weights {:?}",
            fg.dims(),
            bg.dims(),
            w.dims()
        )));
    }
    let (width, height) = fg.dims();
    let planes = (0..w.num_planes())
        .into_par_iter()
        .map(|k| {
            let wk = w.plane(k);
            let mut data = Vec::with_capacity(width * height * 3);
            for ((f, b), &wp) in fg.data().chunks_exact(3).zip(bg.data().chunks_exact(3)).zip(wk) {
                for c in 0..3 {
                    let v = wp * f[c] + (1.0 - wp) * b[c];
                    // keep within [min(f, b), max(f, b)] despite rounding
                    data.push(v.clamp(f[c].min(b[c]), f[c].max(b[c])));
                }
            }
            ImageBuffer::from_raw(width, height, 3, data)
        })
        .collect();
    Ok(planes)
}

/// Combines RGB planes and an alpha volume into an [`Mpi`].
pub fn assemble_mpi(
    planes_rgb: &[ImageBuffer],
    alphas: &AlphaVolume,
    depths: PlaneDepths,
    intrinsics: CameraIntrinsics,
) -> Result<Mpi> {
    let k = planes_rgb.len();
    if k != alphas.num_planes() || k != depths.len() {
        return Err(Error::arg(format!(
            "plane count mismatch: {k} color planes, {} alpha planes, {} depths",
            alphas.num_planes(),
            depths.len()
        )));
    }
    let dims = (alphas.width(), alphas.height());
    if let Some(p) = planes_rgb.iter().find(|p| p.dims() != dims || p.channels() != 3) {
        return Err(Error::arg(format!(
            "color plane {:?}x{} does not match alpha resolution {:?}",
            p.dims(),
            p.channels(),
            dims
        )));
    }
    let planes = planes_rgb
        .par_iter()
        .enumerate()
        .map(|(i, rgb)| rgba_plane(rgb, &alphas.plane_f32(i)))
        .collect();
    Mpi::new(planes, depths, intrinsics)
}

fn rgba_plane(rgb: &ImageBuffer, alpha: &[f32]) -> ImageBuffer {
    let mut data = Vec::with_capacity(alpha.len() * 4);
    for (px, &a) in rgb.data().chunks_exact(3).zip(alpha) {
        data.extend_from_slice(px);
        data.push(a);
    }
    ImageBuffer::from_raw(rgb.width(), rgb.height(), 4, data)
}

/// Splits an MPI back into RGB planes and single-channel alpha planes.
pub fn disassemble_mpi(mpi: &Mpi) -> (Vec<ImageBuffer>, Vec<ImageBuffer>) {
    mpi.planes()
        .iter()
        .map(|p| {
            let mut rgb = Vec::with_capacity(p.width() * p.height() * 3);
            let mut a = Vec::with_capacity(p.width() * p.height());
            for px in p.data().chunks_exact(4) {
                rgb.extend_from_slice(&px[..3]);
                a.push(px[3]);
            }
            (
                ImageBuffer::from_raw(p.width(), p.height(), 3, rgb),
                ImageBuffer::from_raw(p.width(), p.height(), 1, a),
            )
        })
        .unzip()
}

/// Full MPI from foreground, background, weights and disparity.
pub fn build_mpi(
    fg: &ImageBuffer,
    bg: &ImageBuffer,
    weights: &BlendWeights,
    d: &DisparityMap,
    depths: PlaneDepths,
    intrinsics: CameraIntrinsics,
    alpha: &HalfGaussian,
) -> Result<Mpi> {
    if d.dims() != fg.dims() {
        return Err(Error::arg("disparity and color resolution differ"));
    }
    let planes = blend_planes(fg, bg, weights)?;
    let alphas = alpha_from_disparity(d, &depths, alpha)?;
    assemble_mpi(&planes, &alphas, depths, intrinsics)
}

/// "Foreground only" MPI: every plane carries the source image, alphas come
/// from the disparity map. Equivalent to blending with `w ≡ 1`.
pub fn identity_mpi(
    fg: &ImageBuffer,
    d: &DisparityMap,
    depths: PlaneDepths,
    intrinsics: CameraIntrinsics,
    alpha: &HalfGaussian,
) -> Result<Mpi> {
    if d.dims() != fg.dims() {
        return Err(Error::arg(format!(
            "disparity {:?} and color {:?} resolution differ",
            d.dims(),
            fg.dims()
        )));
    }
    let fg = fg.to_channels(3)?;
    let alphas = alpha_from_disparity(d, &depths, alpha)?;
    let planes = vec![fg; depths.len()];
    assemble_mpi(&planes, &alphas, depths, intrinsics)
}
