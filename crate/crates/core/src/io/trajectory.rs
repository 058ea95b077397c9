//! Camera trajectory text files.
//!
//! The first line holds the source video URL. Every following non-empty line
//! describes one frame with 19 whitespace-separated fields:
//!
//! ```text
//! timestamp_us fx fy cx cy unused unused r00 r01 r02 t0 r10 r11 r12 t1 r20 r21 r22 t2
//! ```
//!
//! Intrinsics are normalized by the image width (fx, cx) and height (fy, cy);
//! the 3×4 extrinsic is world-to-camera, row-major.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::scene::{CameraIntrinsics, CameraPose};

const FIELDS: usize = 19;
const ORTHONORMAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl NormalizedIntrinsics {
    /// Pixel intrinsics for a `width × height` frame. The normalized principal
    /// point is measured from the image corner, so half a pixel is removed to
    /// move to pixel-center coordinates.
    pub fn to_pixels(&self, width: usize, height: usize) -> Result<CameraIntrinsics> {
        let (w, h) = (width as f64, height as f64);
        CameraIntrinsics::new(self.fx * w, self.fy * h, self.cx * w - 0.5, self.cy * h - 0.5)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// Microseconds.
    pub timestamp: i64,
    pub intrinsics: NormalizedIntrinsics,
    /// The two uninterpreted fields, kept verbatim.
    pub unused: [String; 2],
    /// Row-major world-to-camera `[R | t]`.
    pub extrinsic: [[f64; 4]; 3],
}

impl TrajectoryRecord {
    pub fn rotation(&self) -> Matrix3<f64> {
        let e = &self.extrinsic;
        Matrix3::new(
            e[0][0], e[0][1], e[0][2], e[1][0], e[1][1], e[1][2], e[2][0], e[2][1], e[2][2],
        )
    }

    pub fn translation(&self) -> Vector3<f64> {
        Vector3::new(self.extrinsic[0][3], self.extrinsic[1][3], self.extrinsic[2][3])
    }

    /// Pose with the stored rotation projected exactly onto SO(3).
    pub fn pose(&self) -> Result<CameraPose> {
        CameraPose::from_approx_rotation(self.rotation(), self.translation())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub url: String,
    pub records: Vec<TrajectoryRecord>,
}

fn parse_line(line: &str, lineno: usize) -> Result<TrajectoryRecord> {
    let err = |m: String| Error::parse(format!("trajectory line {lineno}"), m);
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != FIELDS {
        return Err(err(format!("expected {FIELDS} fields, found {}", fields.len())));
    }
    let timestamp: i64 = fields[0]
        .parse()
        .map_err(|_| err(format!("timestamp {:?} is not an integer", fields[0])))?;
    let num = |i: usize| -> Result<f64> {
        fields[i]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(format!("field {} ({:?}) is not a finite number", i + 1, fields[i])))
    };
    let intrinsics = NormalizedIntrinsics {
        fx: num(1)?,
        fy: num(2)?,
        cx: num(3)?,
        cy: num(4)?,
    };
    for v in [intrinsics.fx, intrinsics.fy, intrinsics.cx, intrinsics.cy] {
        if !(v > 0.0 && v < 2.0) {
            return Err(err(format!("normalized intrinsic {v} outside (0, 2)")));
        }
    }
    let mut extrinsic = [[0.0; 4]; 3];
    for (r, row) in extrinsic.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = num(7 + r * 4 + c)?;
        }
    }
    let record = TrajectoryRecord {
        timestamp,
        intrinsics,
        unused: [fields[5].to_string(), fields[6].to_string()],
        extrinsic,
    };
    let r = record.rotation();
    let ortho = (r.transpose() * r - Matrix3::identity()).amax();
    if ortho > ORTHONORMAL_TOL || (r.determinant() - 1.0).abs() > ORTHONORMAL_TOL {
        return Err(err(format!("rotation block is not orthonormal (error {ortho:e})")));
    }
    Ok(record)
}

pub fn parse_trajectory(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines().enumerate();
    let url = match lines.next() {
        Some((_, l)) if !l.trim().is_empty() => l.trim().to_string(),
        _ => return Err(Error::parse("trajectory line 1", "missing video URL line")),
    };
    let records = lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_line(l, i + 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { url, records })
}

pub fn serialize_trajectory(t: &Trajectory) -> String {
    let mut out = String::new();
    out.push_str(&t.url);
    out.push('\n');
    for r in &t.records {
        let i = &r.intrinsics;
        let mut fields = vec![
            r.timestamp.to_string(),
            i.fx.to_string(),
            i.fy.to_string(),
            i.cx.to_string(),
            i.cy.to_string(),
            r.unused[0].clone(),
            r.unused[1].clone(),
        ];
        fields.extend(r.extrinsic.iter().flatten().map(|v| v.to_string()));
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}
