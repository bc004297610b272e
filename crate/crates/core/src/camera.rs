//! Weak-perspective camera and the eye-centering solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::model::{HeadModelAssets, Mesh};
use crate::scalar::Real;

/// Isotropic scale (pixels per meter) plus a pixel translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraParams<T> {
    pub scale: T,
    pub tx: T,
    pub ty: T,
}

impl<T: Real> CameraParams<T> {
    pub fn new(scale: T, tx: T, ty: T) -> Result<Self> {
        let cam = Self { scale, tx, ty };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.tx.is_finite() && self.ty.is_finite()) {
            return Err(Error::invalid("camera", "non-finite value"));
        }
        if self.scale <= T::zero() {
            return Err(Error::invalid("camera", "scale must be positive"));
        }
        Ok(())
    }

    /// `(x_px, y_px, depth)`: image y grows downward, the camera looks along
    /// `-z`, so smaller depth is closer.
    #[inline]
    pub fn project(&self, p: Vec3<T>) -> Vec3<T> {
        Vec3::new(self.scale * p.x + self.tx, -self.scale * p.y + self.ty, -p.z)
    }

    /// Inverse of [`project`](Self::project) in the image plane.
    pub fn unproject_xy(&self, x_px: T, y_px: T) -> (T, T) {
        ((x_px - self.tx) / self.scale, (self.ty - y_px) / self.scale)
    }
}

pub fn project<T: Real>(point: Vec3<T>, cam: &CameraParams<T>) -> Vec3<T> {
    cam.project(point)
}

/// Square output image, side a power of two in `[32, 1024]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSpec {
    pub resolution: usize,
}

impl ImageSpec {
    pub fn new(resolution: usize) -> Result<Self> {
        if !resolution.is_power_of_two() || !(32..=1024).contains(&resolution) {
            return Err(Error::invalid(
                "resolution",
                format!("{resolution} is not a power of two in [32, 1024]"),
            ));
        }
        Ok(Self { resolution })
    }

    pub fn pixels(&self) -> usize {
        self.resolution * self.resolution
    }
}

/// Framing targets for [`camera_from_eyes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyeFraming {
    pub interocular_px: f64,
    pub center_px: (f64, f64),
}

impl EyeFraming {
    pub const INTEROCULAR_FRACTION: f64 = 0.22;
    pub const CENTER_FRACTION: (f64, f64) = (0.5, 0.42);

    /// FFHQ-like framing for the given image.
    pub fn default_for(image: ImageSpec) -> Self {
        let p = image.resolution as f64;
        Self {
            interocular_px: Self::INTEROCULAR_FRACTION * p,
            center_px: (Self::CENTER_FRACTION.0 * p, Self::CENTER_FRACTION.1 * p),
        }
    }
}

/// Below this (x, y) eye separation, in model units, the scale is unsolvable.
pub const MIN_EYE_SEPARATION: f64 = 1e-6;

/// Solves the camera placing the eye midpoint at `center_px` with the
/// projected eye distance equal to `interocular_px`.
pub fn camera_from_eyes<T: Real>(
    mesh: &Mesh<T>,
    assets: &HeadModelAssets<T>,
    interocular_px: T,
    center_px: (T, T),
) -> Result<CameraParams<T>> {
    let [l, r] = assets.eye_vertex_ids;
    let (l, r) = (l as usize, r as usize);
    if l >= mesh.vertices.len() || r >= mesh.vertices.len() {
        return Err(Error::invalid("eye_vertex_ids", "index outside the mesh"));
    }
    camera_from_eye_points([mesh.vertices[l], mesh.vertices[r]], interocular_px, center_px)
}

pub fn camera_from_eye_points<T: Real>(
    eyes: [Vec3<T>; 2],
    interocular_px: T,
    center_px: (T, T),
) -> Result<CameraParams<T>> {
    if !(interocular_px > T::zero() && interocular_px.is_finite()) {
        return Err(Error::invalid("interocular_px", "must be positive"));
    }
    let [a, b] = eyes;
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    let separation = dx.hypot(dy);
    if !(separation >= T::lit(MIN_EYE_SEPARATION)) {
        return Err(Error::DegenerateEyes {
            separation: separation.to_f64_lossy(),
        });
    }
    let scale = interocular_px / separation;
    let (mx, my) = ((a.x + b.x) * T::half(), (a.y + b.y) * T::half());
    CameraParams::new(scale, center_px.0 - scale * mx, center_px.1 + scale * my)
}
