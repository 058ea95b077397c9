//! Deterministic MPI alphas from a disparity map.
//!
//! Each pixel's disparity is snapped to its nearest plane (one-hot), then a
//! one-sided Gaussian is spread onto the planes *behind* that peak so far
//! content stays partially visible through near layers while the peak plane
//! remains fully opaque.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scene::{nearest_plane, DisparityMap, PlaneDepths};

/// `K × H × W` alpha values in back-to-front order.
///
/// Every volume this module produces has the same shape along the plane axis
/// at every pixel, so it is stored as a per-pixel peak index plus one shared
/// profile: `profile[o]` is the value `o` planes behind the peak. Planes in
/// front of the peak, and planes farther back than the profile reaches, are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVolume {
    planes: usize,
    width: usize,
    height: usize,
    peaks: Vec<u32>,
    profile: Vec<f64>,
}

impl AlphaVolume {
    /// One-hot volume from explicit per-pixel peak indices.
    pub fn one_hot(planes: usize, width: usize, height: usize, peaks: Vec<u32>) -> Result<Self> {
        if peaks.len() != width * height {
            return Err(Error::arg(format!(
                "{} peak indices for a {width}x{height} volume",
                peaks.len()
            )));
        }
        if let Some(&p) = peaks.iter().find(|&&p| p as usize >= planes) {
            return Err(Error::arg(format!("peak index {p} outside {planes} planes")));
        }
        Ok(Self {
            planes,
            width,
            height,
            peaks,
            profile: vec![1.0],
        })
    }

    pub fn num_planes(&self) -> usize {
        self.planes
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Plane index holding the peak at pixel `(x, y)`.
    pub fn peak_index(&self, x: usize, y: usize) -> usize {
        self.peaks[y * self.width + x] as usize
    }

    pub fn peaks(&self) -> &[u32] {
        &self.peaks
    }

    /// Values along the plane axis starting at the peak and moving backward.
    pub fn profile(&self) -> &[f64] {
        &self.profile
    }

    pub fn is_one_hot(&self) -> bool {
        self.profile == [1.0]
    }

    #[inline]
    pub fn value(&self, plane: usize, x: usize, y: usize) -> f64 {
        profile_value(&self.profile, self.peaks[y * self.width + x] as usize, plane)
    }

    /// Values of the pixel at `(x, y)` on every plane, back-to-front.
    pub fn pixel_values(&self, x: usize, y: usize) -> Vec<f64> {
        (0..self.planes).map(|k| self.value(k, x, y)).collect()
    }

    /// Row-major `H × W` slice of one plane.
    pub fn plane(&self, plane: usize) -> Vec<f64> {
        self.peaks
            .iter()
            .map(|&p| profile_value(&self.profile, p as usize, plane))
            .collect()
    }

    /// Same as [`plane`](Self::plane), rounded to single precision.
    pub fn plane_f32(&self, plane: usize) -> Vec<f32> {
        self.peaks
            .iter()
            .map(|&p| profile_value(&self.profile, p as usize, plane) as f32)
            .collect()
    }

    /// Dense `K × H × W` layout.
    pub fn to_dense(&self) -> Vec<f64> {
        (0..self.planes).flat_map(|k| self.plane(k)).collect()
    }
}

#[inline]
fn profile_value(profile: &[f64], peak: usize, plane: usize) -> f64 {
    if plane > peak {
        return 0.0;
    }
    profile.get(peak - plane).copied().unwrap_or(0.0)
}

/// One-hot volume marking, per pixel, the plane nearest to its disparity.
pub fn discretize_disparity(d: &DisparityMap, depths: &PlaneDepths) -> Result<AlphaVolume> {
    let disp = depths.disparities();
    let peaks = d
        .values()
        .par_iter()
        .map(|&v| {
            if v.is_nan() {
                Err(Error::arg("disparity map contains NaN"))
            } else {
                Ok(nearest_plane(v, disp) as u32)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    AlphaVolume::one_hot(depths.len(), d.width(), d.height(), peaks)
}

/// Shape of the one-sided blur along the plane axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfGaussian {
    /// Standard deviation, in planes.
    pub sigma: f64,
    /// Full (two-sided) kernel size in taps; only the `(window - 1) / 2`
    /// taps behind the peak are used.
    pub window: usize,
    pub peak: f64,
}

impl Default for HalfGaussian {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            window: 31,
            peak: 1.0,
        }
    }
}

impl HalfGaussian {
    fn validate(&self) -> Result<()> {
        if self.window.is_multiple_of(2) {
            return Err(Error::arg(format!("window must be odd, got {}", self.window)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::arg(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.peak > 0.0 && self.peak <= 1.0) {
            return Err(Error::arg(format!("peak must lie in (0, 1], got {}", self.peak)));
        }
        Ok(())
    }

    /// `profile[o] = peak * exp(-o^2 / (2 sigma^2))` for `o` in `0..=min(half, K - 1)`.
    fn profile(&self, planes: usize) -> Vec<f64> {
        let half = (self.window - 1) / 2;
        let reach = half.min(planes.saturating_sub(1));
        let two_var = 2.0 * self.sigma * self.sigma;
        let mut profile: Vec<f64> = (0..=reach)
            .map(|o| {
                let o = o as f64;
                self.peak * (-(o * o) / two_var).exp()
            })
            .collect();
        while profile.len() > 1 && profile.last() == Some(&0.0) {
            profile.pop();
        }
        profile
    }
}

/// Spreads each pixel's one-hot peak onto the planes behind it.
///
/// The truncated kernel is not renormalized, so the peak plane keeps exactly
/// `params.peak`.
pub fn half_gaussian_alpha(onehot: &AlphaVolume, params: &HalfGaussian) -> Result<AlphaVolume> {
    params.validate()?;
    if !onehot.is_one_hot() {
        return Err(Error::arg("half-Gaussian alpha expects a one-hot volume"));
    }
    Ok(AlphaVolume {
        profile: params.profile(onehot.planes),
        ..onehot.clone()
    })
}

/// `discretize_disparity` followed by `half_gaussian_alpha`.
pub fn alpha_from_disparity(d: &DisparityMap, depths: &PlaneDepths, params: &HalfGaussian) -> Result<AlphaVolume> {
    half_gaussian_alpha(&discretize_disparity(d, depths)?, params)
}
