use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::scene::CameraPose;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Grid,
    Circle,
    Zoom,
    Custom,
}

/// Ordered camera poses, relative to the MPI reference camera.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraPath {
    kind: PathKind,
    poses: Vec<CameraPose>,
}

impl CameraPath {
    pub fn new(kind: PathKind, poses: Vec<CameraPose>) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::arg("camera path must contain at least one pose"));
        }
        Ok(Self { kind, poses })
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn poses(&self) -> &[CameraPose] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// `n × n` pure translations on the x-y plane covering `[-extent, extent]²`,
/// row-major (rows step in y, columns in x).
pub fn grid_path(n: usize, extent: f64) -> Result<CameraPath> {
    if n == 0 {
        return Err(Error::arg("grid size must be at least 1"));
    }
    if !(extent >= 0.0 && extent.is_finite()) {
        return Err(Error::arg(format!("grid extent must be >= 0, got {extent}")));
    }
    let offset = |i: usize| -> f64 {
        if n == 1 {
            return 0.0;
        }
        // ratio first so the center is exactly 0 and the corners exactly ±extent
        let span = (n - 1) as f64;
        extent * (((2 * i) as f64 - span) / span)
    };
    let poses = (0..n)
        .flat_map(|row| (0..n).map(move |col| (row, col)))
        .map(|(row, col)| CameraPose::from_translation(offset(col), offset(row), 0.0))
        .collect();
    CameraPath::new(PathKind::Grid, poses)
}

/// `frames` translations `(r cos θ, r sin θ, 0)` with θ equispaced over `[0, 2π)`.
pub fn circle_path(radius: f64, frames: usize) -> Result<CameraPath> {
    if frames == 0 {
        return Err(Error::arg("circle path needs at least one frame"));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::arg(format!("radius must be >= 0, got {radius}")));
    }
    let poses = (0..frames)
        .map(|i| {
            let theta = TAU * i as f64 / frames as f64;
            CameraPose::from_translation(radius * theta.cos(), radius * theta.sin(), 0.0)
        })
        .collect();
    CameraPath::new(PathKind::Circle, poses)
}

/// Dolly along the optical axis: the camera center advances from 0 to
/// `distance` meters along +z (toward the scene) over `frames` frames.
pub fn zoom_path(distance: f64, frames: usize) -> Result<CameraPath> {
    if frames == 0 {
        return Err(Error::arg("zoom path needs at least one frame"));
    }
    if !distance.is_finite() {
        return Err(Error::arg("zoom distance must be finite"));
    }
    let poses = (0..frames)
        .map(|i| {
            let z = if frames == 1 {
                0.0
            } else {
                distance * i as f64 / (frames - 1) as f64
            };
            // world-to-camera translation is minus the center for an unrotated camera
            CameraPose::from_translation(0.0, 0.0, -z)
        })
        .collect();
    CameraPath::new(PathKind::Zoom, poses)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_by_seven_grid() {
        let g = grid_path(7, 0.3).unwrap();
        assert_eq!(g.len(), 49);
        assert!(g.poses()[24].is_identity());
        let t = |i: usize| *g.poses()[i].translation();
        assert_eq!((t(0).x, t(0).y), (-0.3, -0.3));
        assert_eq!((t(6).x, t(6).y), (0.3, -0.3));
        assert_eq!((t(42).x, t(42).y), (-0.3, 0.3));
        assert_eq!((t(48).x, t(48).y), (0.3, 0.3));
        assert!(g.poses().iter().all(|p| p.translation().z == 0.0));
    }

    #[test]
    fn small_grids() {
        let g = grid_path(1, 0.3).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.poses()[0].is_identity());
        let g = grid_path(3, 0.3).unwrap();
        let xs: Vec<f64> = g.poses()[..3].iter().map(|p| p.translation().x).collect();
        assert_eq!(xs, vec![-0.3, 0.0, 0.3]);
        assert!(grid_path(0, 0.3).is_err());
    }

    #[test]
    fn circle_quarters_and_degenerate_radius() {
        let r = 0.25;
        let c = circle_path(r, 4).unwrap();
        let expect = [(r, 0.0), (0.0, r), (-r, 0.0), (0.0, -r)];
        for (p, (x, y)) in c.poses().iter().zip(expect) {
            assert!((p.translation().x - x).abs() < 1e-15);
            assert!((p.translation().y - y).abs() < 1e-15);
        }
        assert!(circle_path(0.0, 5)
            .unwrap()
            .poses()
            .iter()
            .all(|p| p.translation().amax() == 0.0));
    }

    #[test]
    fn circle_is_periodic() {
        let n = 12;
        let c = circle_path(0.3, n).unwrap();
        // frame n would be at θ = 2π, which coincides with frame 0
        let theta = TAU * n as f64 / n as f64;
        let wrap = (0.3 * theta.cos(), 0.3 * theta.sin());
        let first = c.poses()[0].translation();
        assert!((first.x - wrap.0).abs() < 1e-12 && (first.y - wrap.1).abs() < 1e-12);
    }

    #[test]
    fn zoom_moves_toward_the_scene() {
        let z = zoom_path(0.5, 6).unwrap();
        assert!(z.poses()[0].is_identity());
        assert!((z.poses()[5].center().z - 0.5).abs() < 1e-15);
        for w in z.poses().windows(2) {
            assert!(w[1].center().z > w[0].center().z);
        }
    }
}
