use crate::error::{Error, Result};

/// Depths of the MPI planes, stored back-to-front (index 0 is the farthest
/// plane), equispaced in disparity between `1/far` and `1/near`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneDepths {
    near: f64,
    far: f64,
    depths: Vec<f64>,
    disparities: Vec<f64>,
}

impl PlaneDepths {
    pub fn len(&self) -> usize {
        self.depths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depths.is_empty()
    }

    pub fn near(&self) -> f64 {
        self.near
    }

    pub fn far(&self) -> f64 {
        self.far
    }

    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    pub fn depth(&self, k: usize) -> f64 {
        self.depths[k]
    }

    /// Plane disparities, ascending (same back-to-front indexing as the depths).
    pub fn disparities(&self) -> &[f64] {
        &self.disparities
    }

    /// Disparity spacing between consecutive planes.
    pub fn spacing(&self) -> f64 {
        (1.0 / self.near - 1.0 / self.far) / (self.depths.len() - 1) as f64
    }
}

/// Builds a schedule of `count` planes between `near` and `far` meters.
pub fn plane_depths(count: usize, near: f64, far: f64) -> Result<PlaneDepths> {
    if count < 2 {
        return Err(Error::arg(format!("plane count must be at least 2, got {count}")));
    }
    if !(near > 0.0 && near < far && far.is_finite()) {
        return Err(Error::arg(format!(
            "depth range must satisfy 0 < near < far, got near={near} far={far}"
        )));
    }
    let (d_lo, d_hi) = (1.0 / far, 1.0 / near);
    let last = (count - 1) as f64;
    let disparities: Vec<f64> = (0..count)
        .map(|k| match k {
            0 => d_lo,
            k if k == count - 1 => d_hi,
            k => d_lo + (d_hi - d_lo) * (k as f64 / last),
        })
        .collect();
    let depths = disparities
        .iter()
        .enumerate()
        .map(|(k, &d)| match k {
            0 => far,
            k if k == count - 1 => near,
            _ => 1.0 / d,
        })
        .collect();
    Ok(PlaneDepths {
        near,
        far,
        depths,
        disparities,
    })
}

/// Index of the plane whose disparity is nearest to `value`.
///
/// Exact midpoints resolve toward the nearer plane (higher index); values
/// outside the schedule clamp to the end planes.
pub fn disparity_to_plane_index(value: f64, depths: &PlaneDepths) -> Result<usize> {
    if value.is_nan() {
        return Err(Error::arg("disparity is NaN"));
    }
    Ok(nearest_plane(value, depths.disparities()))
}

#[inline]
pub(crate) fn nearest_plane(value: f64, disp: &[f64]) -> usize {
    let k = disp.len();
    if value <= disp[0] {
        return 0;
    }
    if value >= disp[k - 1] {
        return k - 1;
    }
    // first index whose disparity exceeds value; value lies in [disp[hi-1], disp[hi])
    let hi = disp.partition_point(|&d| d <= value);
    let lo = hi - 1;
    // 2v >= lo + hi: ties (including a rounded (lo + hi) / 2) go to the nearer plane
    if 2.0 * value >= disp[lo] + disp[hi] {
        hi
    } else {
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_planes_are_the_endpoints() {
        let p = plane_depths(2, 1.0, 100.0).unwrap();
        assert_eq!(p.depths(), &[100.0, 1.0]);
    }

    #[test]
    fn three_planes_midpoint() {
        let p = plane_depths(3, 1.0, 100.0).unwrap();
        assert_eq!(p.depth(0), 100.0);
        assert_eq!(p.depth(2), 1.0);
        // hand oracle: (0.01 + 1) / 2 = 0.505, 1 / 0.505 = 1.98019801980...
        assert!((p.depth(1) - 1.980_198_019_801_98).abs() < 1e-12);
    }

    #[test]
    fn production_schedule_is_equispaced() {
        let p = plane_depths(128, 1.0, 100.0).unwrap();
        assert_eq!(p.len(), 128);
        let delta = (1.0 - 0.01) / 127.0;
        for k in 0..127 {
            assert!(p.depth(k) > p.depth(k + 1));
            let step = 1.0 / p.depth(k + 1) - 1.0 / p.depth(k);
            assert!((step - delta).abs() < 1e-9, "k={k} step={step}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(plane_depths(1, 1.0, 100.0).is_err());
        assert!(plane_depths(4, 0.0, 100.0).is_err());
        assert!(plane_depths(4, 10.0, 1.0).is_err());
        assert!(plane_depths(4, 1.0, 1.0).is_err());
        let p = plane_depths(4, 1.0, 100.0).unwrap();
        assert!(disparity_to_plane_index(f64::NAN, &p).is_err());
    }

    #[test]
    fn grid_hits_and_clamping() {
        let p = plane_depths(16, 1.0, 100.0).unwrap();
        for k in 0..16 {
            assert_eq!(disparity_to_plane_index(1.0 / p.depth(k), &p).unwrap(), k);
        }
        assert_eq!(disparity_to_plane_index(0.0, &p).unwrap(), 0);
        assert_eq!(disparity_to_plane_index(7.0, &p).unwrap(), 15);
    }

    #[test]
    fn midpoints_break_toward_nearer_plane() {
        // enumerate every gap of a 4-plane schedule
        let p = plane_depths(4, 1.0, 100.0).unwrap();
        let d = p.disparities();
        for k in 0..3 {
            let mid = (d[k] + d[k + 1]) / 2.0;
            assert_eq!(disparity_to_plane_index(mid, &p).unwrap(), k + 1);
            let below = mid - 1e-9;
            assert_eq!(disparity_to_plane_index(below, &p).unwrap(), k);
        }
    }

    proptest! {
        #[test]
        fn index_is_monotone(a in 0.0f64..1.5, b in 0.0f64..1.5, k in 2usize..40) {
            let p = plane_depths(k, 1.0, 100.0).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(disparity_to_plane_index(lo, &p).unwrap()
                <= disparity_to_plane_index(hi, &p).unwrap());
        }

        #[test]
        fn index_is_nearest(v in 0.0f64..1.2, k in 2usize..40) {
            let p = plane_depths(k, 1.0, 100.0).unwrap();
            let i = disparity_to_plane_index(v, &p).unwrap();
            let best = p.disparities().iter().map(|d| (d - v).abs()).fold(f64::INFINITY, f64::min);
            prop_assert!(((p.disparities()[i] - v).abs() - best).abs() < 1e-12);
        }
    }
}
