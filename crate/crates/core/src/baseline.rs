//! Single-image warping baseline: filtered disparity, z-buffered splatting
//! with a visibility mask, occlusion-mask cleanup and diffusion inpainting.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scene::{CameraIntrinsics, CameraPose, DisparityMap, ImageBuffer};

pub const DEFAULT_MEDIAN_WINDOW: usize = 19;
pub const DEFAULT_MASK_WINDOW: usize = 9;
pub const DEFAULT_MASK_RATIO: f64 = 0.5;

/// Per-pixel flag: `true` where the warped image received source content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl VisibilityMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::arg(format!(
                "mask has {} entries, expected {width}x{height}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn count_visible(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn and(&self, other: &VisibilityMask) -> Result<VisibilityMask> {
        if self.dims() != other.dims() {
            return Err(Error::arg("mask sizes differ"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a && *b).collect();
        Ok(Self {
            width: self.width,
            height: self.height,
            data,
        })
    }
}

fn check_odd(window: usize, what: &str) -> Result<()> {
    if window.is_multiple_of(2) {
        return Err(Error::arg(format!("{what} window must be odd, got {window}")));
    }
    Ok(())
}

/// `window × window` median with replicated borders.
pub fn median_filter_disparity(d: &DisparityMap, window: usize) -> Result<DisparityMap> {
    check_odd(window, "median")?;
    let (w, h) = d.dims();
    let r = (window / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut out = vec![0.0f64; w * h];
    out.par_chunks_mut(w.max(1)).enumerate().for_each(|(y, row)| {
        let mut buf = Vec::with_capacity(window * window);
        for (x, o) in row.iter_mut().enumerate() {
            buf.clear();
            for dy in -r..=r {
                let sy = clamp(y as isize + dy, h);
                for dx in -r..=r {
                    buf.push(d.get(clamp(x as isize + dx, w), sy));
                }
            }
            let mid = buf.len() / 2;
            *o = *buf.select_nth_unstable_by(mid, f64::total_cmp).1;
        }
    });
    DisparityMap::new(w, h, d.unit(), out)
}

/// Warps `fg` to the camera at `rel` (relative to the source camera).
///
/// Disparity is first point-splatted into the target view with a z-buffer
/// (the nearest surface wins; ties keep the first source pixel in row-major
/// order). Every covered target pixel then back-projects with its splatted
/// disparity and samples `fg` bilinearly. Uncovered pixels are black and
/// marked invisible. Disparities are read as inverse meters.
pub fn warp_single_image(
    fg: &ImageBuffer,
    d: &DisparityMap,
    rel: &CameraPose,
    intr: &CameraIntrinsics,
) -> Result<(ImageBuffer, VisibilityMask)> {
    if fg.dims() != d.dims() {
        return Err(Error::arg(format!(
            "image {:?} and disparity {:?} resolution differ",
            fg.dims(),
            d.dims()
        )));
    }
    let (w, h) = fg.dims();
    let r = rel.rotation();
    let t = rel.translation();

    // target inverse depth per pixel; negative = nothing landed here
    let mut zbuf = vec![-1.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let disp = d.get(x, y);
            // disp * X_t, well defined for points at infinity
            let q = r * intr.unproject(x as f64, y as f64) + t * disp;
            if q.z <= 0.0 {
                continue;
            }
            let u = (intr.fx * q.x / q.z + intr.cx).round();
            let v = (intr.fy * q.y / q.z + intr.cy).round();
            if !(u >= 0.0 && v >= 0.0 && u < w as f64 && v < h as f64) {
                continue;
            }
            let i = v as usize * w + u as usize;
            let inv = disp / q.z;
            if inv > zbuf[i] {
                zbuf[i] = inv;
            }
        }
    }

    let channels = fg.channels();
    let rt = r.transpose();
    let mut data = vec![0.0f32; w * h * channels];
    let mut visible = vec![false; w * h];
    data.par_chunks_mut(w * channels)
        .zip(visible.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (row, vis))| {
            for x in 0..w {
                let inv = zbuf[y * w + x];
                if inv < 0.0 {
                    continue;
                }
                // inv * X_s = Rᵀ (ray_t - t * inv)
                let p = rt * (intr.unproject(x as f64, y as f64) - t * inv);
                if p.z <= 0.0 {
                    continue;
                }
                let u = intr.fx * p.x / p.z + intr.cx;
                let v = intr.fy * p.y / p.z + intr.cy;
                sample_clamped(fg, snap(u), snap(v), &mut row[x * channels..(x + 1) * channels]);
                vis[x] = true;
            }
        });
    Ok((
        ImageBuffer::from_raw(w, h, channels, data),
        VisibilityMask::new(w, h, visible)?,
    ))
}

/// Removes round-off from coordinates that should be integral.
#[inline]
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v
    }
}

fn sample_clamped(img: &ImageBuffer, u: f64, v: f64, out: &mut [f32]) {
    let (w, h) = img.dims();
    let u = u.clamp(0.0, (w - 1) as f64);
    let v = v.clamp(0.0, (h - 1) as f64);
    let x0 = u.floor() as usize;
    let y0 = v.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = (u - x0 as f64) as f32;
    let fy = (v - y0 as f64) as f32;
    for (c, o) in out.iter_mut().enumerate() {
        let top = img.get(x0, y0, c) * (1.0 - fx) + img.get(x1, y0, c) * fx;
        let bottom = img.get(x0, y1, c) * (1.0 - fx) + img.get(x1, y1, c) * fx;
        *o = (top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0);
    }
}

/// A pixel is visible iff at least `ratio` of the in-bounds pixels in its
/// `window × window` neighborhood (itself included) are visible.
pub fn threshold_occlusion_mask(mask: &VisibilityMask, window: usize, ratio: f64) -> Result<VisibilityMask> {
    check_odd(window, "occlusion mask")?;
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::arg(format!("ratio must lie in [0, 1], got {ratio}")));
    }
    let (w, h) = mask.dims();
    // summed-area table with a zero border row/column
    let mut sat = vec![0u32; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut acc = 0u32;
        for x in 0..w {
            acc += mask.get(x, y) as u32;
            sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + acc;
        }
    }
    let r = window / 2;
    let data = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
            let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
            let count =
                sat[y1 * (w + 1) + x1] + sat[y0 * (w + 1) + x0] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0];
            let total = ((x1 - x0) * (y1 - y0)) as f64;
            count as f64 >= ratio * total
        })
        .collect();
    VisibilityMask::new(w, h, data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    /// Stop once the largest per-sweep change falls below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iters: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InpaintReport {
    pub iterations: usize,
    /// Largest change in the final sweep.
    pub last_update: f64,
    pub converged: bool,
}

/// Fills invisible pixels with the discrete harmonic interpolant of the
/// visible ones (4-neighbour Laplacian, Dirichlet data on visible pixels,
/// zero-flux at the image border).
pub fn diffusion_inpaint(img: &ImageBuffer, mask: &VisibilityMask, params: &DiffusionParams) -> Result<ImageBuffer> {
    diffusion_inpaint_with_report(img, mask, params).map(|(out, _)| out)
}

/// Red-black Gauss-Seidel: each colour class only reads the other, so every
/// half-sweep is an order-independent parallel map.
pub fn diffusion_inpaint_with_report(
    img: &ImageBuffer,
    mask: &VisibilityMask,
    params: &DiffusionParams,
) -> Result<(ImageBuffer, InpaintReport)> {
    if img.dims() != mask.dims() {
        return Err(Error::arg("image and mask resolution differ"));
    }
    if mask.count_visible() == 0 {
        return Err(Error::degenerate("no visible pixels to diffuse from"));
    }
    let (w, h) = img.dims();
    let ch = img.channels();

    // per-channel range and mean of the boundary data
    let mut lo = vec![f64::INFINITY; ch];
    let mut hi = vec![f64::NEG_INFINITY; ch];
    let mut mean = vec![0.0f64; ch];
    for (i, px) in img.data().chunks_exact(ch).enumerate() {
        if mask.data()[i] {
            for c in 0..ch {
                let v = px[c] as f64;
                lo[c] = lo[c].min(v);
                hi[c] = hi[c].max(v);
                mean[c] += v;
            }
        }
    }
    let n_vis = mask.count_visible() as f64;
    for m in &mut mean {
        *m /= n_vis;
    }

    let mut values: Vec<f64> = img.data().iter().map(|&v| v as f64).collect();
    let mut unknown: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !mask.data()[i] {
                values[i * ch..(i + 1) * ch].copy_from_slice(&mean);
                unknown[(x + y) % 2].push(i);
            }
        }
    }

    let neighbours = |i: usize| -> ([usize; 4], usize) {
        let (x, y) = (i % w, i / w);
        let mut n = [0usize; 4];
        let mut k = 0;
        if x > 0 {
            n[k] = i - 1;
            k += 1;
        }
        if x + 1 < w {
            n[k] = i + 1;
            k += 1;
        }
        if y > 0 {
            n[k] = i - w;
            k += 1;
        }
        if y + 1 < h {
            n[k] = i + w;
            k += 1;
        }
        (n, k)
    };

    let mut report = InpaintReport {
        iterations: 0,
        last_update: 0.0,
        converged: unknown[0].is_empty() && unknown[1].is_empty(),
    };
    while !report.converged && report.iterations < params.max_iters {
        let mut max_change = 0.0f64;
        for class in &unknown {
            let updates: Vec<(usize, Vec<f64>, f64)> = class
                .par_iter()
                .map(|&i| {
                    let (nb, k) = neighbours(i);
                    let mut change = 0.0f64;
                    let new: Vec<f64> = (0..ch)
                        .map(|c| {
                            let s: f64 = nb[..k].iter().map(|&j| values[j * ch + c]).sum();
                            let v = (s / k as f64).clamp(lo[c], hi[c]);
                            change = change.max((v - values[i * ch + c]).abs());
                            v
                        })
                        .collect();
                    (i, new, change)
                })
                .collect();
            for (i, new, change) in updates {
                values[i * ch..(i + 1) * ch].copy_from_slice(&new);
                max_change = max_change.max(change);
            }
        }
        report.iterations += 1;
        report.last_update = max_change;
        report.converged = max_change < params.tol;
    }

    let data = values.iter().map(|&v| (v as f32).clamp(0.0, 1.0)).collect();
    Ok((ImageBuffer::from_raw(w, h, ch, data), report))
}
