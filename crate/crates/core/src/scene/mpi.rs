use super::{CameraIntrinsics, ImageBuffer, PlaneDepths};
use crate::error::{Error, Result};

/// Multiplane image: `K` straight-alpha RGBA planes, back-to-front, sharing
/// one resolution and the intrinsics of the reference camera.
#[derive(Debug, Clone, PartialEq)]
pub struct Mpi {
    planes: Vec<ImageBuffer>,
    depths: PlaneDepths,
    intrinsics: CameraIntrinsics,
}

impl Mpi {
    pub fn new(planes: Vec<ImageBuffer>, depths: PlaneDepths, intrinsics: CameraIntrinsics) -> Result<Self> {
        if planes.len() != depths.len() {
            return Err(Error::arg(format!(
                "{} planes for a {}-plane depth schedule",
                planes.len(),
                depths.len()
            )));
        }
        let dims = planes[0].dims();
        for (k, p) in planes.iter().enumerate() {
            if p.channels() != 4 {
                return Err(Error::arg(format!(
                    "plane {k} has {} channels, expected RGBA",
                    p.channels()
                )));
            }
            if p.dims() != dims {
                return Err(Error::arg(format!("plane {k} is {:?}, expected {:?}", p.dims(), dims)));
            }
        }
        Ok(Self {
            planes,
            depths,
            intrinsics,
        })
    }

    pub fn planes(&self) -> &[ImageBuffer] {
        &self.planes
    }

    pub fn depths(&self) -> &PlaneDepths {
        &self.depths
    }

    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.intrinsics
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    pub fn into_parts(self) -> (Vec<ImageBuffer>, PlaneDepths, CameraIntrinsics) {
        (self.planes, self.depths, self.intrinsics)
    }
}
