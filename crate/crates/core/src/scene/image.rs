use crate::error::{Error, Result};

/// Row-major floating-point raster with 1, 3 or 4 interleaved channels.
///
/// Samples are kept in `[0, 1]`; constructors reject anything else so that
/// every downstream operation can rely on the range.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageBuffer {
    /// Fully transparent black (or plain black for 1/3 channels).
    pub fn zeros(width: usize, height: usize, channels: usize) -> Result<Self> {
        check_channels(channels)?;
        Ok(Self {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        })
    }

    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        check_channels(channels)?;
        if data.len() != width * height * channels {
            return Err(Error::arg(format!(
                "image data has {} samples, expected {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::arg(format!("image sample {bad} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y, c)`; the result is clamped to `[0, 1]`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        check_channels(channels)?;
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    let v = f(x, y, c);
                    if !v.is_finite() {
                        return Err(Error::arg("non-finite image sample"));
                    }
                    data.push(v.clamp(0.0, 1.0));
                }
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Constructor for buffers produced internally whose range is already guaranteed.
    pub(crate) fn from_raw(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn row(&self, y: usize) -> &[f32] {
        let n = self.width * self.channels;
        &self.data[y * n..(y + 1) * n]
    }

    /// Writes one sample, clamping into `[0, 1]`.
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f32) {
        let i = (y * self.width + x) * self.channels + c;
        self.data[i] = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    }

    /// Channel layout conversion: gray is replicated into RGB, alpha is dropped
    /// or filled with 1.
    pub fn to_channels(&self, channels: usize) -> Result<ImageBuffer> {
        check_channels(channels)?;
        if channels == self.channels {
            return Ok(self.clone());
        }
        let mut data = Vec::with_capacity(self.width * self.height * channels);
        for px in self.data.chunks_exact(self.channels) {
            let rgb = match self.channels {
                1 => [px[0]; 3],
                _ => [px[0], px[1], px[2]],
            };
            let a = if self.channels == 4 { px[3] } else { 1.0 };
            match channels {
                1 => data.push((rgb[0] + rgb[1] + rgb[2]) / 3.0),
                3 => data.extend_from_slice(&rgb),
                _ => {
                    data.extend_from_slice(&rgb);
                    data.push(a);
                }
            }
        }
        Ok(Self::from_raw(self.width, self.height, channels, data))
    }
}

fn check_channels(channels: usize) -> Result<()> {
    match channels {
        1 | 3 | 4 => Ok(()),
        n => Err(Error::arg(format!("unsupported channel count {n}"))),
    }
}

/// How the values of a [`DisparityMap`] are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisparityUnit {
    /// Unitless disparity in `[0, 1]`. Geometry code reads it as 1/m, which is
    /// exact for the default plane schedule (disparities 0.01 to 1).
    Normalized,
    /// Physical inverse depth in 1/m.
    InverseMeters,
}

impl DisparityUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            DisparityUnit::Normalized => "normalized",
            DisparityUnit::InverseMeters => "inverse_meters",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "normalized" => Some(DisparityUnit::Normalized),
            "inverse_meters" => Some(DisparityUnit::InverseMeters),
            _ => None,
        }
    }
}

/// Single-channel inverse-depth raster.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    unit: DisparityUnit,
    values: Vec<f64>,
}

impl DisparityMap {
    pub fn new(width: usize, height: usize, unit: DisparityUnit, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::arg(format!(
                "disparity map has {} values, expected {}x{}",
                values.len(),
                width,
                height
            )));
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::arg(format!("disparity {v} is not a finite value >= 0")));
            }
            if unit == DisparityUnit::Normalized && v > 1.0 {
                return Err(Error::arg(format!("normalized disparity {v} exceeds 1")));
            }
        }
        Ok(Self {
            width,
            height,
            unit,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, unit: DisparityUnit, value: f64) -> Result<Self> {
        Self::new(width, height, unit, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        unit: DisparityUnit,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, unit, values)
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

    pub fn unit(&self) -> DisparityUnit {
        self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn with_unit(self, unit: DisparityUnit) -> Result<Self> {
        Self::new(self.width, self.height, unit, self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_range() {
        assert!(ImageBuffer::from_vec(2, 2, 3, vec![0.0; 11]).is_err());
        assert!(ImageBuffer::from_vec(1, 1, 1, vec![1.5]).is_err());
        assert!(ImageBuffer::from_vec(1, 1, 2, vec![0.0; 2]).is_err());
        assert!(ImageBuffer::from_vec(1, 1, 1, vec![f32::NAN]).is_err());
    }

    #[test]
    fn channel_conversion() {
        let g = ImageBuffer::from_vec(1, 1, 1, vec![0.25]).unwrap();
        let rgba = g.to_channels(4).unwrap();
        assert_eq!(rgba.data(), &[0.25, 0.25, 0.25, 1.0]);
        assert_eq!(rgba.to_channels(3).unwrap().data(), &[0.25, 0.25, 0.25]);
    }

    #[test]
    fn disparity_invariants() {
        assert!(DisparityMap::new(1, 1, DisparityUnit::Normalized, vec![1.2]).is_err());
        assert!(DisparityMap::new(1, 1, DisparityUnit::InverseMeters, vec![1.2]).is_ok());
        assert!(DisparityMap::new(1, 1, DisparityUnit::InverseMeters, vec![-0.1]).is_err());
        assert!(DisparityMap::new(1, 1, DisparityUnit::InverseMeters, vec![f64::NAN]).is_err());
    }
}
