use super::{rasterize_with, RasterOptions, RenderBuffers};
use crate::camera::{CameraParams, ImageSpec};
use crate::error::{Error, Result};
use crate::imgbuf::Image;
use crate::math::Vec3;
use crate::model::{vertex_normals, Mesh};
use crate::scalar::Real;
use crate::shading::{shade, LightingParams, TextureMap};

/// Encoded zero vector: the normal rendering's background.
pub const NORMAL_BACKGROUND: f64 = 0.5;

/// Fragments plus both condition renderings.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendering<T> {
    pub buffers: RenderBuffers<T>,
    pub normal_img: Image<T>,
    pub color_img: Image<T>,
}

/// Unit normal per covered pixel, interpolated from vertex normals. Falls back
/// to the face normal when the interpolated vector vanishes.
pub fn interpolated_normals<T: Real>(buffers: &RenderBuffers<T>, mesh: &Mesh<T>) -> Vec<Option<Vec3<T>>> {
    let vn = vertex_normals(mesh);
    buffers
        .tri_id
        .iter()
        .zip(&buffers.bary)
        .zip(&buffers.mask)
        .map(|((&f, w), &covered)| {
            if !covered {
                return None;
            }
            let face = mesh.faces[f as usize];
            let n = (0..3).fold(Vec3::zero(), |acc, k| acc + vn[face[k] as usize] * w[k]);
            n.try_normalize().or_else(|| {
                let p = mesh.triangle(f as usize);
                (p[1] - p[0]).cross(p[2] - p[0]).try_normalize()
            })
        })
        .collect()
}

/// Maps a unit normal to `[0, 1]³` as `(n + 1) / 2`.
#[inline]
pub fn encode_normal<T: Real>(n: Vec3<T>) -> [T; 3] {
    [n.x, n.y, n.z].map(|c| (c + T::one()) * T::half())
}

#[inline]
pub fn decode_normal<T: Real>(rgb: [T; 3]) -> Vec3<T> {
    let d = |c: T| c * T::two() - T::one();
    Vec3::new(d(rgb[0]), d(rgb[1]), d(rgb[2]))
}

/// `(n + 1) / 2` of the interpolated camera-space normal; background 0.5.
pub fn render_normals<T: Real>(buffers: &RenderBuffers<T>, mesh: &Mesh<T>) -> Image<T> {
    normals_image(buffers.resolution, &interpolated_normals(buffers, mesh))
}

fn normals_image<T: Real>(res: usize, normals: &[Option<Vec3<T>>]) -> Image<T> {
    let bg = [T::lit(NORMAL_BACKGROUND); 3];
    Image {
        resolution: res,
        pixels: normals.iter().map(|n| n.map_or(bg, encode_normal)).collect(),
    }
}

/// SH-shaded albedo at each covered pixel; background black.
pub fn render_textured<T: Real>(
    buffers: &RenderBuffers<T>,
    mesh: &Mesh<T>,
    albedo: &TextureMap<T>,
    light: &LightingParams<T>,
) -> Result<Image<T>> {
    if mesh.uv.is_none() {
        return Err(Error::MissingUv);
    }
    Ok(textured_image(buffers, &interpolated_normals(buffers, mesh), albedo, light))
}

fn textured_image<T: Real>(
    buffers: &RenderBuffers<T>,
    normals: &[Option<Vec3<T>>],
    albedo: &TextureMap<T>,
    light: &LightingParams<T>,
) -> Image<T> {
    let pixels = normals
        .iter()
        .zip(&buffers.uv)
        .map(|(n, uv)| match n {
            Some(n) => shade(albedo.sample(uv[0], uv[1]), *n, light),
            None => [T::zero(); 3],
        })
        .collect();
    Image {
        resolution: buffers.resolution,
        pixels,
    }
}

/// Rasterizes once and produces both renderings.
pub fn render<T: Real>(
    mesh: &Mesh<T>,
    cam: &CameraParams<T>,
    image: ImageSpec,
    albedo: &TextureMap<T>,
    light: &LightingParams<T>,
    opts: RasterOptions,
) -> Result<Rendering<T>> {
    if mesh.uv.is_none() {
        return Err(Error::MissingUv);
    }
    let buffers = rasterize_with(mesh, cam, image, opts);
    let normals = interpolated_normals(&buffers, mesh);
    let normal_img = normals_image(buffers.resolution, &normals);
    let color_img = textured_image(&buffers, &normals, albedo, light);
    Ok(Rendering {
        buffers,
        normal_img,
        color_img,
    })
}
