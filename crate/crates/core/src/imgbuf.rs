//! Square RGB float images.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::shading::bilinear;

/// Row-major `resolution × resolution` RGB image. Pixel `(row, col)` covers
/// `[col, col + 1) × [row, row + 1)` in pixel coordinates; its center is at
/// `(col + 0.5, row + 0.5)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    pub resolution: usize,
    pub pixels: Vec<[T; 3]>,
}

impl<T: Real> Image<T> {
    pub fn filled(resolution: usize, rgb: [T; 3]) -> Self {
        Self {
            resolution,
            pixels: vec![rgb; resolution * resolution],
        }
    }

    pub fn from_pixels(resolution: usize, pixels: Vec<[T; 3]>) -> Result<Self> {
        if pixels.len() != resolution * resolution {
            return Err(Error::ResolutionMismatch(format!(
                "{} pixels for a {resolution} x {resolution} image",
                pixels.len()
            )));
        }
        Ok(Self { resolution, pixels })
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> [T; 3] {
        self.pixels[row * self.resolution + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, rgb: [T; 3]) {
        self.pixels[row * self.resolution + col] = rgb;
    }

    /// Bilinear sample at continuous pixel coordinates, clamp-to-edge.
    pub fn sample(&self, x_px: T, y_px: T) -> [T; 3] {
        let n = self.resolution;
        bilinear(n, n, x_px - T::half(), y_px - T::half(), |r, c| self.get(r, c))
    }

    /// Bilinear sample that only draws on pixels with `mask` set, renormalizing
    /// the remaining tap weights. `None` when every tap with nonzero weight is
    /// masked out.
    pub fn sample_masked(&self, x_px: T, y_px: T, mask: &[bool]) -> Option<[T; 3]> {
        let n = self.resolution;
        let max = T::of_usize(n - 1);
        let x = (x_px - T::half()).max(T::zero()).min(max);
        let y = (y_px - T::half()).max(T::zero()).min(max);
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let c0 = x0.to_usize()?;
        let r0 = y0.to_usize()?;
        let taps = [
            (r0, c0, (T::one() - fx) * (T::one() - fy)),
            (r0, (c0 + 1).min(n - 1), fx * (T::one() - fy)),
            ((r0 + 1).min(n - 1), c0, (T::one() - fx) * fy),
            ((r0 + 1).min(n - 1), (c0 + 1).min(n - 1), fx * fy),
        ];
        let mut total = T::zero();
        let mut acc = [T::zero(); 3];
        for (r, c, w) in taps {
            if w > T::zero() && mask[r * n + c] {
                total = total + w;
                let p = self.get(r, c);
                for ch in 0..3 {
                    acc[ch] = acc[ch] + w * p[ch];
                }
            }
        }
        if total > T::zero() {
            if total == T::one() {
                Some(acc)
            } else {
                Some(acc.map(|a| a / total))
            }
        } else {
            None
        }
    }

    pub fn cast<U: Real>(&self) -> Image<U> {
        Image {
            resolution: self.resolution,
            pixels: self
                .pixels
                .iter()
                .map(|p| p.map(|x| U::lit(x.to_f64_lossy())))
                .collect(),
        }
    }
}
