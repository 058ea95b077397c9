//! Affine alignment of relative disparity onto absolute disparity, and the
//! linear normalized-disparity encoding.

use crate::baseline::VisibilityMask;
use crate::error::{Error, Result};
use crate::scene::{DisparityMap, DisparityUnit};

/// Physical disparity (1/m) mapped to normalized 0.
pub const NORMALIZED_MIN_DISPARITY: f64 = 0.5;
/// Physical disparity (1/m) mapped to normalized 1.
pub const NORMALIZED_MAX_DISPARITY: f64 = 32.0;

/// `abs ≈ scale * rel + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleShift {
    pub scale: f64,
    pub shift: f64,
}

impl ScaleShift {
    pub const IDENTITY: ScaleShift = ScaleShift { scale: 1.0, shift: 0.0 };

    pub fn new(scale: f64, shift: f64) -> Result<Self> {
        if !(scale.is_finite() && shift.is_finite()) {
            return Err(Error::arg("scale and shift must be finite"));
        }
        Ok(Self { scale, shift })
    }

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        self.scale * v + self.shift
    }
}

/// Neumaier-compensated running sum; summation order is the caller's iteration order.
#[derive(Default)]
struct Sum {
    total: f64,
    comp: f64,
}

impl Sum {
    fn add(&mut self, v: f64) {
        let t = self.total + v;
        if self.total.abs() >= v.abs() {
            self.comp += (self.total - t) + v;
        } else {
            self.comp += (v - t) + self.total;
        }
        self.total = t;
    }

    fn value(&self) -> f64 {
        self.total + self.comp
    }
}

/// Least-squares `(scale, shift)` minimizing `Σ (scale·rel + shift − abs)²`
/// over the valid pixels (all pixels when `valid` is `None`).
///
/// Solves the 2×2 normal equations in closed form, in centered form:
/// `scale = Σ(r − r̄)(a − ā) / Σ(r − r̄)²`, `shift = ā − scale·r̄`.
pub fn fit_scale_shift(rel: &DisparityMap, abs: &DisparityMap, valid: Option<&VisibilityMask>) -> Result<ScaleShift> {
    if rel.dims() != abs.dims() {
        return Err(Error::arg(format!(
            "relative {:?} and absolute {:?} disparity resolution differ",
            rel.dims(),
            abs.dims()
        )));
    }
    if let Some(m) = valid {
        if m.dims() != rel.dims() {
            return Err(Error::arg("valid mask resolution differs from disparity"));
        }
    }
    let pairs = || {
        rel.values()
            .iter()
            .zip(abs.values())
            .enumerate()
            .filter(move |(i, _)| valid.is_none_or(|m| m.data()[*i]))
            .map(|(_, (&r, &a))| (r, a))
    };
    let n = pairs().count();
    if n < 2 {
        return Err(Error::degenerate(format!("need at least 2 valid pixels, got {n}")));
    }
    let (mut sr, mut sa) = (Sum::default(), Sum::default());
    for (r, a) in pairs() {
        sr.add(r);
        sa.add(a);
    }
    let nf = n as f64;
    let (mr, ma) = (sr.value() / nf, sa.value() / nf);
    let (mut sxx, mut sxy) = (Sum::default(), Sum::default());
    for (r, a) in pairs() {
        let (dr, da) = (r - mr, a - ma);
        sxx.add(dr * dr);
        sxy.add(dr * da);
    }
    let sxx = sxx.value();
    if sxx <= 1e-24 * nf * (1.0 + mr * mr) {
        return Err(Error::degenerate(
            "relative disparity is constant over the valid pixels",
        ));
    }
    let scale = sxy.value() / sxx;
    ScaleShift::new(scale, ma - scale * mr).map_err(|_| Error::degenerate("non-finite fit"))
}

/// Pixelwise `scale·rel + shift`, negatives clamped to 0; the result is in inverse meters.
pub fn apply_scale_shift(rel: &DisparityMap, t: &ScaleShift) -> Result<DisparityMap> {
    let values = rel.values().iter().map(|&v| t.apply(v).max(0.0)).collect();
    DisparityMap::new(rel.width(), rel.height(), DisparityUnit::InverseMeters, values)
}

/// Root-mean-square residual of a fit over the valid pixels.
pub fn fit_residual(rel: &DisparityMap, abs: &DisparityMap, valid: Option<&VisibilityMask>, t: &ScaleShift) -> f64 {
    let mut sum = Sum::default();
    let mut n = 0usize;
    for (i, (&r, &a)) in rel.values().iter().zip(abs.values()).enumerate() {
        if valid.is_none_or(|m| m.data()[i]) {
            let e = t.apply(r) - a;
            sum.add(e * e);
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        (sum.value() / n as f64).sqrt()
    }
}

/// Physical disparity in `[0.5, 32]` (clamped) to `[0, 1]`, linearly.
pub fn encode_normalized(phys: f64) -> Result<f64> {
    if phys.is_nan() {
        return Err(Error::arg("disparity is NaN"));
    }
    let p = phys.clamp(NORMALIZED_MIN_DISPARITY, NORMALIZED_MAX_DISPARITY);
    Ok((p - NORMALIZED_MIN_DISPARITY) / (NORMALIZED_MAX_DISPARITY - NORMALIZED_MIN_DISPARITY))
}

/// Inverse of [`encode_normalized`]; input is clamped to `[0, 1]`.
pub fn decode_normalized(norm: f64) -> Result<f64> {
    if norm.is_nan() {
        return Err(Error::arg("normalized disparity is NaN"));
    }
    let n = norm.clamp(0.0, 1.0);
    Ok(NORMALIZED_MIN_DISPARITY + n * (NORMALIZED_MAX_DISPARITY - NORMALIZED_MIN_DISPARITY))
}

pub fn encode_map(phys: &DisparityMap) -> Result<DisparityMap> {
    let values = phys
        .values()
        .iter()
        .map(|&v| encode_normalized(v))
        .collect::<Result<_>>()?;
    DisparityMap::new(phys.width(), phys.height(), DisparityUnit::Normalized, values)
}

pub fn decode_map(norm: &DisparityMap) -> Result<DisparityMap> {
    let values = norm
        .values()
        .iter()
        .map(|&v| decode_normalized(v))
        .collect::<Result<_>>()?;
    DisparityMap::new(norm.width(), norm.height(), DisparityUnit::InverseMeters, values)
}
