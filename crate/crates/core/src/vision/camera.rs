use std::f64::consts::FRAC_PI_4;

use crate::geom::Point2;

use super::VisionError;

/// Pinhole camera rigidly mounted on the cart, pitched down toward the floor,
/// with one-parameter radial distortion.
///
/// Image coordinates are continuous: pixel `(i, j)` covers `[i, i+1) x
/// [j, j+1)` and the principal point is the image center. Distortion radii
/// are normalized by the half diagonal, so `r = 1` at the corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub mount_height: f64,
    /// Downward tilt of the optical axis below horizontal, radians.
    pub pitch: f64,
    pub horizontal_fov: f64,
    pub width: usize,
    pub height: usize,
    pub distortion_k1: f64,
    /// Distance of the lens ahead of the axle midpoint, meters.
    pub forward_offset: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            mount_height: 0.15,
            pitch: FRAC_PI_4,
            horizontal_fov: 60f64.to_radians(),
            width: 160,
            height: 120,
            distortion_k1: 0.0,
            forward_offset: 0.03,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), VisionError> {
        if !(self.pitch > 0.0 && self.pitch < std::f64::consts::FRAC_PI_2) {
            return Err(VisionError::InvalidCamera("pitch must lie in (0, pi/2)"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(VisionError::InvalidCamera("resolution must be positive"));
        }
        if !(self.mount_height > 0.0) {
            return Err(VisionError::InvalidCamera("mount height must be positive"));
        }
        if !(self.horizontal_fov > 0.0 && self.horizontal_fov < std::f64::consts::PI) {
            return Err(VisionError::InvalidCamera("field of view must lie in (0, pi)"));
        }
        check_monotone(self.distortion_k1)
    }

    pub fn focal_px(&self) -> f64 {
        (self.width as f64 / 2.0) / (self.horizontal_fov / 2.0).tan()
    }

    pub fn center(&self) -> Point2 {
        Point2::new(self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    pub fn with_k1(self, k1: f64) -> Self {
        Self { distortion_k1: k1, ..self }
    }

    /// Ground point hit by the ray through undistorted image point `(u, v)`,
    /// in the cart frame as `(forward, left)` meters from the axle midpoint.
    /// `None` for rays at or above the horizon.
    pub fn ground_point(&self, u: f64, v: f64) -> Option<(f64, f64)> {
        let f = self.focal_px();
        let c = self.center();
        let xc = (u - c.x) / f;
        let yc = (v - c.y) / f;
        let (sp, cp) = self.pitch.sin_cos();
        let down = sp + yc * cp;
        if down <= 1e-9 {
            return None;
        }
        let t = self.mount_height / down;
        Some((self.forward_offset + t * (cp - yc * sp), -t * xc))
    }

    /// Projects a cart-frame ground point to undistorted image coordinates.
    pub fn project_ground(&self, forward: f64, left: f64) -> Option<Point2> {
        let (sp, cp) = self.pitch.sin_cos();
        let dx = forward - self.forward_offset;
        let dz = -self.mount_height;
        // Camera axes: optical (cp, 0, -sp), right (0, -1, 0), down (-sp, 0, -cp).
        let depth = dx * cp - dz * sp;
        if depth <= 1e-9 {
            return None;
        }
        let right = -left;
        let down = -dx * sp - dz * cp;
        let f = self.focal_px();
        let c = self.center();
        Some(Point2::new(c.x + f * right / depth, c.y + f * down / depth))
    }

    fn half_diagonal(&self) -> f64 {
        (self.width as f64 / 2.0).hypot(self.height as f64 / 2.0)
    }

    /// Where an ideal image point lands on the distorted sensor.
    pub fn distort_point(&self, p: Point2) -> Point2 {
        distort_point(p, self.center(), self.half_diagonal(), self.distortion_k1)
    }

    /// Inverse of [`CameraModel::distort_point`].
    pub fn undistort_point(&self, p: Point2) -> Point2 {
        undistort_point(p, self.center(), self.half_diagonal(), self.distortion_k1)
    }
}

pub(crate) fn check_monotone(k1: f64) -> Result<(), VisionError> {
    // d/dr [r (1 + k1 r^2)] = 1 + 3 k1 r^2 must stay positive up to r = 1.
    if !k1.is_finite() || 1.0 + 3.0 * k1 <= 0.0 {
        return Err(VisionError::NonMonotoneDistortion(k1));
    }
    Ok(())
}

pub(crate) fn distort_point(p: Point2, c: Point2, norm: f64, k1: f64) -> Point2 {
    let q = (p - c) * (1.0 / norm);
    let r2 = q.dot(q);
    c + q * ((1.0 + k1 * r2) * norm)
}

pub(crate) fn undistort_point(p: Point2, c: Point2, norm: f64, k1: f64) -> Point2 {
    if k1 == 0.0 {
        return p;
    }
    let q = (p - c) * (1.0 / norm);
    let rd = q.norm();
    if rd == 0.0 {
        return p;
    }
    // Newton on r (1 + k1 r^2) = rd.
    let mut r = rd;
    for _ in 0..20 {
        let g = r * (1.0 + k1 * r * r) - rd;
        let dg = 1.0 + 3.0 * k1 * r * r;
        let step = g / dg;
        r -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    c + q * (r / rd * norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_inverts_ground_point() {
        let cam = CameraModel::default();
        for (u, v) in [(10.5, 100.5), (80.0, 60.0), (150.5, 119.5), (3.5, 40.5)] {
            let (f, l) = cam.ground_point(u, v).unwrap();
            let p = cam.project_ground(f, l).unwrap();
            assert!((p.x - u).abs() < 1e-9 && (p.y - v).abs() < 1e-9);
        }
    }

    #[test]
    fn optical_axis_hits_ground_at_height_over_tan_pitch() {
        let cam = CameraModel::default();
        let c = cam.center();
        let (f, l) = cam.ground_point(c.x, c.y).unwrap();
        assert!((f - cam.forward_offset - cam.mount_height / cam.pitch.tan()).abs() < 1e-12);
        assert!(l.abs() < 1e-12);
    }

    #[test]
    fn distortion_round_trip() {
        let cam = CameraModel::default().with_k1(0.1);
        for p in [Point2::new(0.0, 0.0), Point2::new(159.0, 119.0), Point2::new(40.0, 90.0)] {
            let back = cam.undistort_point(cam.distort_point(p));
            assert!(back.distance(p) < 1e-9);
        }
    }

    #[test]
    fn monotonicity_bound() {
        assert!(check_monotone(0.1).is_ok());
        assert!(check_monotone(-0.3).is_ok());
        assert!(check_monotone(-1.0 / 3.0).is_err());
        assert!(check_monotone(-0.5).is_err());
    }
}
