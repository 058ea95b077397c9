//! Portable float map (PFM) reading and writing.
//!
//! Header: `PF` (RGB) or `Pf` (gray), then `width height`, then a scale whose
//! sign gives the byte order (negative = little endian). Rows are stored
//! bottom-to-top.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scene::{DisparityMap, DisparityUnit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endian {
    Little,
    Big,
}

/// Decoded PFM contents, rows top-to-bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct Pfm {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    /// Absolute value of the header scale field.
    pub scale: f32,
    pub endian: Endian,
    pub data: Vec<f32>,
}

impl Pfm {
    pub fn decode(bytes: &[u8], context: &str) -> Result<Self> {
        let err = |m: String| Error::parse(context.to_string(), m);
        let mut pos = 0;
        let mut token = || -> Result<String> {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::parse(context.to_string(), "truncated PFM header"));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        let channels = match token()?.as_str() {
            "PF" => 3,
            "Pf" => 1,
            other => return Err(err(format!("bad PFM magic {other:?}"))),
        };
        let width: usize = token()?.parse().map_err(|_| err("bad PFM width".into()))?;
        let height: usize = token()?.parse().map_err(|_| err("bad PFM height".into()))?;
        let scale: f32 = token()?.parse().map_err(|_| err("bad PFM scale".into()))?;
        if scale == 0.0 || !scale.is_finite() {
            return Err(err(format!("PFM scale must be non-zero, got {scale}")));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let endian = if scale < 0.0 { Endian::Little } else { Endian::Big };
        let n = width * height * channels;
        let raster = bytes.get(pos..).unwrap_or(&[]);
        if raster.len() != n * 4 {
            return Err(err(format!(
                "PFM raster has {} bytes, expected {}",
                raster.len(),
                n * 4
            )));
        }
        let row_len = width * channels;
        let mut data = vec![0.0f32; n];
        for (src_row, chunk) in raster.chunks_exact((row_len * 4).max(1)).enumerate().take(height) {
            let dst_row = height - 1 - src_row;
            for (i, b) in chunk.chunks_exact(4).enumerate() {
                let b = [b[0], b[1], b[2], b[3]];
                data[dst_row * row_len + i] = match endian {
                    Endian::Little => f32::from_le_bytes(b),
                    Endian::Big => f32::from_be_bytes(b),
                };
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            scale: scale.abs(),
            endian,
            data,
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        let magic = if self.channels == 3 { "PF" } else { "Pf" };
        let scale = match self.endian {
            Endian::Little => -self.scale.abs(),
            Endian::Big => self.scale.abs(),
        };
        let mut out = format!("{magic}\n{} {}\n{scale:?}\n", self.width, self.height).into_bytes();
        let row_len = self.width * self.channels;
        out.reserve(self.data.len() * 4);
        for y in (0..self.height).rev() {
            for &v in &self.data[y * row_len..(y + 1) * row_len] {
                match self.endian {
                    Endian::Little => out.extend_from_slice(&v.to_le_bytes()),
                    Endian::Big => out.extend_from_slice(&v.to_be_bytes()),
                }
            }
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }
}

/// Reads a single-channel PFM as a disparity map. Values are stored as `f32`.
pub fn load_disparity_pfm(path: &Path, unit: DisparityUnit) -> Result<DisparityMap> {
    let pfm = Pfm::read(path)?;
    if pfm.channels != 1 {
        return Err(Error::parse(
            path.display().to_string(),
            "disparity PFM must be single-channel (Pf)",
        ));
    }
    let values = pfm.data.iter().map(|&v| v as f64).collect();
    DisparityMap::new(pfm.width, pfm.height, unit, values)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

/// Writes a disparity map as little-endian `Pf`; values round to `f32`.
pub fn save_disparity_pfm(path: &Path, d: &DisparityMap) -> Result<()> {
    Pfm {
        width: d.width(),
        height: d.height(),
        channels: 1,
        scale: 1.0,
        endian: Endian::Little,
        data: d.values().iter().map(|&v| v as f32).collect(),
    }
    .write(path)
}
