//! 8/16-bit PNG for color rasters and 16-bit PNG for disparity maps.
//!
//! Disparity PNGs carry two tEXt chunks: `disparity_unit` (`normalized` or
//! `inverse_meters`) and `disparity_max`, the value encoded by the largest
//! code. Files without them are read as normalized with max 1.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};
use crate::scene::{DisparityMap, DisparityUnit, ImageBuffer};

const UNIT_KEY: &str = "disparity_unit";
const MAX_KEY: &str = "disparity_max";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PngDepth {
    Eight,
    Sixteen,
}

struct Decoded {
    width: usize,
    height: usize,
    color: ColorType,
    samples: Vec<f32>,
    max_code: f32,
    codes: Vec<u16>,
    text: Vec<(String, String)>,
}

fn decode(path: &Path) -> Result<Decoded> {
    let ctx = || path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| Error::parse(ctx(), e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::parse(ctx(), "PNG too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::parse(ctx(), e.to_string()))?;
    buf.truncate(info.buffer_size());
    let text = reader
        .info()
        .uncompressed_latin1_text
        .iter()
        .map(|t| (t.keyword.clone(), t.text.clone()))
        .collect();
    let (codes, max_code): (Vec<u16>, f32) = match info.bit_depth {
        BitDepth::Sixteen => (
            buf.chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect(),
            65535.0,
        ),
        BitDepth::Eight => (buf.iter().map(|&b| b as u16).collect(), 255.0),
        other => return Err(Error::parse(ctx(), format!("unsupported bit depth {other:?}"))),
    };
    let samples = codes.iter().map(|&c| c as f32 / max_code).collect();
    Ok(Decoded {
        width: info.width as usize,
        height: info.height as usize,
        color: info.color_type,
        samples,
        max_code,
        codes,
        text,
    })
}

/// Loads an 8- or 16-bit PNG. Gray stays 1-channel, gray+alpha becomes RGBA.
pub fn load_image_png(path: &Path) -> Result<ImageBuffer> {
    let d = decode(path)?;
    let (channels, data) = match d.color {
        ColorType::Grayscale => (1, d.samples),
        ColorType::Rgb => (3, d.samples),
        ColorType::Rgba => (4, d.samples),
        ColorType::GrayscaleAlpha => (
            4,
            d.samples
                .chunks_exact(2)
                .flat_map(|p| [p[0], p[0], p[0], p[1]])
                .collect(),
        ),
        ColorType::Indexed => return Err(Error::parse(path.display().to_string(), "indexed PNG was not expanded")),
    };
    ImageBuffer::from_vec(d.width, d.height, channels, data)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

fn color_type(channels: usize) -> ColorType {
    match channels {
        1 => ColorType::Grayscale,
        3 => ColorType::Rgb,
        _ => ColorType::Rgba,
    }
}

fn write_png(
    path: &Path,
    width: usize,
    height: usize,
    color: ColorType,
    depth: PngDepth,
    codes: &[u16],
    text: &[(&str, String)],
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    enc.set_color(color);
    enc.set_depth(match depth {
        PngDepth::Eight => BitDepth::Eight,
        PngDepth::Sixteen => BitDepth::Sixteen,
    });
    let enc_err = |e: png::EncodingError| match e {
        png::EncodingError::IoError(io) => Error::io(path, io),
        other => Error::parse(path.display().to_string(), other.to_string()),
    };
    for (k, v) in text {
        enc.add_text_chunk(k.to_string(), v.clone()).map_err(enc_err)?;
    }
    let mut writer = enc.write_header().map_err(enc_err)?;
    let bytes: Vec<u8> = match depth {
        PngDepth::Eight => codes.iter().map(|&c| c as u8).collect(),
        PngDepth::Sixteen => codes.iter().flat_map(|c| c.to_be_bytes()).collect(),
    };
    writer.write_image_data(&bytes).map_err(enc_err)?;
    writer.finish().map_err(enc_err)
}

fn quantize(v: f32, max_code: f32) -> u16 {
    (v.clamp(0.0, 1.0) * max_code).round() as u16
}

pub fn save_image_png(path: &Path, img: &ImageBuffer, depth: PngDepth) -> Result<()> {
    let max_code = match depth {
        PngDepth::Eight => 255.0,
        PngDepth::Sixteen => 65535.0,
    };
    let codes: Vec<u16> = img.data().iter().map(|&v| quantize(v, max_code)).collect();
    write_png(
        path,
        img.width(),
        img.height(),
        color_type(img.channels()),
        depth,
        &codes,
        &[],
    )
}

/// Loads a gray PNG as disparity, honoring the unit and scale chunks.
pub fn load_disparity_png(path: &Path) -> Result<DisparityMap> {
    let ctx = || path.display().to_string();
    let d = decode(path)?;
    if d.color != ColorType::Grayscale {
        return Err(Error::parse(ctx(), "disparity PNG must be single-channel gray"));
    }
    let lookup = |key: &str| d.text.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let unit = match lookup(UNIT_KEY) {
        None => DisparityUnit::Normalized,
        Some(s) => {
            DisparityUnit::parse(s).ok_or_else(|| Error::parse(ctx(), format!("unknown disparity unit {s:?}")))?
        }
    };
    let max: f64 = match lookup(MAX_KEY) {
        None => 1.0,
        Some(s) => s
            .parse()
            .ok()
            .filter(|m: &f64| *m > 0.0 && m.is_finite())
            .ok_or_else(|| Error::parse(ctx(), format!("bad disparity max {s:?}")))?,
    };
    let values = d.codes.iter().map(|&c| c as f64 / d.max_code as f64 * max).collect();
    DisparityMap::new(d.width, d.height, unit, values).map_err(|e| Error::parse(ctx(), e.to_string()))
}

/// Writes a 16-bit gray disparity PNG; `max` is the value of code 65535.
pub fn save_disparity_png16(path: &Path, d: &DisparityMap, max: f64) -> Result<()> {
    if !(max > 0.0 && max.is_finite()) {
        return Err(Error::arg(format!("disparity max must be positive, got {max}")));
    }
    let codes: Vec<u16> = d
        .values()
        .iter()
        .map(|&v| ((v / max).clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect();
    write_png(
        path,
        d.width(),
        d.height(),
        ColorType::Grayscale,
        PngDepth::Sixteen,
        &codes,
        &[(UNIT_KEY, d.unit().as_str().to_string()), (MAX_KEY, format!("{max:?}"))],
    )
}
