//! Linear albedo model and second-order spherical-harmonics Lambertian shading.
//!
//! Basis functions are the real SH up to band 2 evaluated on a unit normal
//! `n = (x, y, z)`, in the order
//!
//! | k | function                                  |
//! |---|-------------------------------------------|
//! | 0 | `1 / (2 sqrt(pi))`            = 0.2820948 |
//! | 1 | `sqrt(3 / (4 pi)) * y`        = 0.4886025 y |
//! | 2 | `sqrt(3 / (4 pi)) * z`        |
//! | 3 | `sqrt(3 / (4 pi)) * x`        |
//! | 4 | `sqrt(15 / (4 pi)) * x y`     = 1.0925484 xy |
//! | 5 | `sqrt(15 / (4 pi)) * y z`     |
//! | 6 | `sqrt(5 / (16 pi)) * (3 z^2 - 1)` = 0.3153916 (3z²-1) |
//! | 7 | `sqrt(15 / (4 pi)) * x z`     |
//! | 8 | `sqrt(15 / (16 pi)) * (x^2 - y^2)` = 0.5462742 (x²-y²) |
//!
//! Lighting coefficients multiply these directly; any Lambertian convolution
//! factors are assumed to be folded into the coefficients. Irradiance is not
//! clamped, only the final color is.

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::model::{HeadModelAssets, APPEARANCE_DIM};
use crate::scalar::Real;

pub const SH_COEFFS: usize = 9;
pub const LIGHTING_DIM: usize = SH_COEFFS * 3;

#[derive(Debug, Clone, PartialEq)]
pub struct AppearanceParams<T> {
    pub alpha: Vec<T>,
}

impl<T: Real> AppearanceParams<T> {
    pub fn zeros() -> Self {
        Self {
            alpha: vec![T::zero(); APPEARANCE_DIM],
        }
    }

    pub fn new(alpha: Vec<T>) -> Result<Self> {
        if alpha.len() != APPEARANCE_DIM {
            return Err(Error::dim("alpha", APPEARANCE_DIM, alpha.len()));
        }
        if alpha.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("alpha", "non-finite value"));
        }
        Ok(Self { alpha })
    }
}

/// Nine SH coefficients per RGB channel, `coeffs[k][channel]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightingParams<T> {
    pub coeffs: [[T; 3]; SH_COEFFS],
}

impl<T: Real> LightingParams<T> {
    pub fn zeros() -> Self {
        Self {
            coeffs: [[T::zero(); 3]; SH_COEFFS],
        }
    }

    /// Light whose irradiance is 1 in every direction and channel.
    pub fn constant_unit() -> Self {
        let mut l = Self::zeros();
        l.coeffs[0] = [T::one() / sh_constants::<T>()[0]; 3];
        l
    }

    /// From the flattened layout `[k * 3 + channel]`.
    pub fn from_flat(flat: &[T]) -> Result<Self> {
        if flat.len() != LIGHTING_DIM {
            return Err(Error::dim("lighting", LIGHTING_DIM, flat.len()));
        }
        if flat.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("lighting", "non-finite value"));
        }
        let mut l = Self::zeros();
        for (k, c) in l.coeffs.iter_mut().enumerate() {
            c.copy_from_slice(&flat[k * 3..k * 3 + 3]);
        }
        Ok(l)
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.coeffs.iter().flatten().copied().collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x = *x + *y;
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().flatten().for_each(|x| *x = *x * s);
        out
    }
}

/// Square RGB texture in `[0, 1]`, row-major, row index following `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureMap<T> {
    pub res: usize,
    pub texels: Vec<[T; 3]>,
}

impl<T: Real> TextureMap<T> {
    pub fn constant(res: usize, rgb: [T; 3]) -> Self {
        Self {
            res,
            texels: vec![rgb; res * res],
        }
    }

    pub fn from_fn(res: usize, f: impl Fn(T, T) -> [T; 3]) -> Self {
        let n = T::of_usize(res);
        let texels = (0..res * res)
            .map(|i| {
                let (row, col) = (i / res, i % res);
                f(
                    (T::of_usize(col) + T::half()) / n,
                    (T::of_usize(row) + T::half()) / n,
                )
            })
            .collect();
        Self { res, texels }
    }

    #[inline]
    pub fn texel(&self, row: usize, col: usize) -> [T; 3] {
        self.texels[row * self.res + col]
    }

    /// Bilinear lookup with texel centers at `(i + 0.5) / res` and
    /// clamp-to-edge addressing.
    pub fn sample(&self, u: T, v: T) -> [T; 3] {
        let n = T::of_usize(self.res);
        bilinear(self.res, self.res, u * n - T::half(), v * n - T::half(), |r, c| self.texel(r, c))
    }
}

/// Bilinear interpolation of a `rows × cols` grid at continuous index
/// coordinates `(x, y)` (column, row) with clamp-to-edge addressing.
#[inline]
pub(crate) fn bilinear<T: Real>(rows: usize, cols: usize, x: T, y: T, fetch: impl Fn(usize, usize) -> [T; 3]) -> [T; 3] {
    let max_x = T::of_usize(cols - 1);
    let max_y = T::of_usize(rows - 1);
    let x = x.max(T::zero()).min(max_x);
    let y = y.max(T::zero()).min(max_y);
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let c0 = x0.to_usize().unwrap_or(0);
    let r0 = y0.to_usize().unwrap_or(0);
    let c1 = (c0 + 1).min(cols - 1);
    let r1 = (r0 + 1).min(rows - 1);
    let (a, b, c, d) = (fetch(r0, c0), fetch(r0, c1), fetch(r1, c0), fetch(r1, c1));
    let one = T::one();
    let mut out = [T::zero(); 3];
    for ch in 0..3 {
        let top = if fx == T::zero() { a[ch] } else { a[ch] * (one - fx) + b[ch] * fx };
        let bottom = if fx == T::zero() { c[ch] } else { c[ch] * (one - fx) + d[ch] * fx };
        out[ch] = if fy == T::zero() { top } else { top * (one - fy) + bottom * fy };
    }
    out
}

/// `albedo_mean + albedo_basis · alpha` before clamping.
pub fn albedo_unclamped<T: Real>(assets: &HeadModelAssets<T>, a: &AppearanceParams<T>) -> Result<TextureMap<T>> {
    if a.alpha.len() != APPEARANCE_DIM {
        return Err(Error::dim("alpha", APPEARANCE_DIM, a.alpha.len()));
    }
    let n = assets.tex_res * assets.tex_res;
    if assets.albedo_mean.len() != n * 3 || assets.albedo_basis.len() != n * 3 * APPEARANCE_DIM {
        return Err(Error::dim("albedo_basis", format!("{n} x 3 x {APPEARANCE_DIM}"), assets.albedo_basis.len()));
    }
    let texels = (0..n)
        .map(|t| {
            let mut rgb = [T::zero(); 3];
            for (ch, out) in rgb.iter_mut().enumerate() {
                let i = t * 3 + ch;
                let col = &assets.albedo_basis[i * APPEARANCE_DIM..(i + 1) * APPEARANCE_DIM];
                *out = assets.albedo_mean[i]
                    + col.iter().zip(&a.alpha).fold(T::zero(), |acc, (&b, &c)| acc + b * c);
            }
            rgb
        })
        .collect();
    Ok(TextureMap {
        res: assets.tex_res,
        texels,
    })
}

/// Albedo for appearance coefficients, clamped to `[0, 1]`.
pub fn albedo_from_appearance<T: Real>(assets: &HeadModelAssets<T>, a: &AppearanceParams<T>) -> Result<TextureMap<T>> {
    let mut tex = albedo_unclamped(assets, a)?;
    tex.texels.iter_mut().flatten().for_each(|x| *x = x.clamp01());
    Ok(tex)
}

/// Normalization constants of the nine basis functions (see module docs).
pub fn sh_constants<T: Real>() -> [T; SH_COEFFS] {
    let pi = T::PI();
    let c0 = T::half() / pi.sqrt();
    let c1 = (T::lit(3.0) / (T::lit(4.0) * pi)).sqrt();
    let c2 = (T::lit(15.0) / (T::lit(4.0) * pi)).sqrt();
    let c20 = (T::lit(5.0) / (T::lit(16.0) * pi)).sqrt();
    let c22 = (T::lit(15.0) / (T::lit(16.0) * pi)).sqrt();
    [c0, c1, c1, c1, c2, c2, c20, c2, c22]
}

/// Tolerance on `|n| = 1` accepted by [`sh_basis`].
pub const UNIT_TOLERANCE: f64 = 1e-6;

pub fn sh_basis<T: Real>(n: Vec3<T>) -> Result<[T; SH_COEFFS]> {
    let len = n.norm();
    if !((len - T::one()).abs() <= T::lit(UNIT_TOLERANCE)) {
        return Err(Error::invalid("normal", format!("|n| = {len}, expected a unit vector")));
    }
    Ok(sh_basis_unchecked(n))
}

#[inline]
pub fn sh_basis_unchecked<T: Real>(n: Vec3<T>) -> [T; SH_COEFFS] {
    let c = sh_constants::<T>();
    let Vec3 { x, y, z } = n;
    [
        c[0],
        c[1] * y,
        c[2] * z,
        c[3] * x,
        c[4] * x * y,
        c[5] * y * z,
        c[6] * (T::lit(3.0) * z * z - T::one()),
        c[7] * x * z,
        c[8] * (x * x - y * y),
    ]
}

/// Per-channel irradiance `sum_k l[k][ch] * Y_k(n)`, unclamped.
#[inline]
pub fn irradiance<T: Real>(n: Vec3<T>, light: &LightingParams<T>) -> [T; 3] {
    let y = sh_basis_unchecked(n);
    let mut out = [T::zero(); 3];
    for (k, yk) in y.iter().enumerate() {
        for (ch, o) in out.iter_mut().enumerate() {
            *o = *o + light.coeffs[k][ch] * *yk;
        }
    }
    out
}

/// `albedo * irradiance` per channel, before clamping.
#[inline]
pub fn shade_unclamped<T: Real>(albedo: [T; 3], n: Vec3<T>, light: &LightingParams<T>) -> [T; 3] {
    let e = irradiance(n, light);
    [albedo[0] * e[0], albedo[1] * e[1], albedo[2] * e[2]]
}

#[inline]
pub fn shade<T: Real>(albedo: [T; 3], n: Vec3<T>, light: &LightingParams<T>) -> [T; 3] {
    shade_unclamped(albedo, n, light).map(|c| c.clamp01())
}
