//! Texture stealing: projecting an image back into the mesh's UV layout, and
//! the masked L2 consistency loss between two stolen textures.

use rayon::prelude::*;

use crate::camera::{CameraParams, ImageSpec};
use crate::error::{Error, Result};
use crate::imgbuf::Image;
use crate::math::Vec3;
use crate::model::Mesh;
use crate::raster::{edge, pixel_center, project_triangles, rasterize_with, RasterOptions, ScreenTriangle, Vec2};
use crate::scalar::Real;

/// Relative depth tolerance of the visibility test, as a fraction of the
/// mesh's depth extent.
pub const DEPTH_EPSILON_FRACTION: f64 = 1e-4;

pub const DEFAULT_TEXTURE_RES: usize = 128;

/// Where each texel of the UV layout lands in the image, and whether it is
/// seen there.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceMap<T> {
    pub tex_res: usize,
    pub image_res: usize,
    /// Continuous pixel coordinates per texel (row-major, row following `v`);
    /// zero for texels no triangle covers.
    pub img_xy: Vec<[T; 2]>,
    pub visible: Vec<bool>,
    /// Image pixels covered by the mesh. Sampling only reads these pixels so
    /// that silhouette texels do not blend in background.
    pub pixel_mask: Vec<bool>,
}

impl<T: Real> CorrespondenceMap<T> {
    pub fn visible_count(&self) -> usize {
        self.visible.iter().filter(|&&v| v).count()
    }
}

/// Incomplete texture map with its visibility mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialTexture<T> {
    pub res: usize,
    pub texels: Vec<[T; 3]>,
    pub visible: Vec<bool>,
}

/// Texel → surface point assignment from rasterizing the UV layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TexelSurfacePoint<T> {
    pub face: u32,
    pub bary: [T; 3],
}

/// Rasterizes the mesh's UV layout at `tex_res`: for each texel center, the
/// lowest-index face whose UV triangle covers it (top-left rule, either
/// winding) and the barycentric weights there.
pub fn uv_surface_points<T: Real>(mesh: &Mesh<T>, tex_res: usize) -> Result<Vec<Option<TexelSurfacePoint<T>>>> {
    let uvs = mesh.uv.as_ref().ok_or(Error::MissingUv)?;
    let n = T::of_usize(tex_res);
    let mut out: Vec<Option<TexelSurfacePoint<T>>> = vec![None; tex_res * tex_res];
    for (f, corners) in uvs.iter().enumerate() {
        let pts = corners.map(|uv| Vec2 {
            x: uv[0] * n,
            y: uv[1] * n,
        });
        let Some(tri) = ScreenTriangle::any_winding(pts) else { continue };
        let Some((xs, ys)) = tri.pixel_bounds(tex_res) else { continue };
        for row in ys[0]..=ys[1] {
            for col in xs[0]..=xs[1] {
                let slot = &mut out[row * tex_res + col];
                if slot.is_some() {
                    continue;
                }
                if let Some(bary) = tri.cover(pixel_center(row, col)) {
                    *slot = Some(TexelSurfacePoint { face: f as u32, bary });
                }
            }
        }
    }
    Ok(out)
}

/// Front-facing triangles binned on a coarse image grid for point depth
/// queries at arbitrary sub-pixel positions.
struct DepthQuery<T> {
    triangles: Vec<Option<ScreenTriangle<T>>>,
    cell: usize,
    cells_per_side: usize,
    bins: Vec<Vec<u32>>,
}

impl<T: Real> DepthQuery<T> {
    fn new(triangles: Vec<Option<ScreenTriangle<T>>>, res: usize) -> Self {
        let cell = 4;
        let cells_per_side = res.div_ceil(cell);
        let mut bins = vec![Vec::new(); cells_per_side * cells_per_side];
        let max = T::of_usize(res) - T::lit(1e-9);
        let to_cell = |v: T| (v.max(T::zero()).min(max).floor().to_usize().unwrap_or(0)) / cell;
        for (f, tri) in triangles.iter().enumerate() {
            let Some(t) = tri else { continue };
            let lo_x = t.pts.iter().map(|p| p.x).fold(T::infinity(), T::min);
            let hi_x = t.pts.iter().map(|p| p.x).fold(T::neg_infinity(), T::max);
            let lo_y = t.pts.iter().map(|p| p.y).fold(T::infinity(), T::min);
            let hi_y = t.pts.iter().map(|p| p.y).fold(T::neg_infinity(), T::max);
            if hi_x < T::zero() || hi_y < T::zero() || lo_x > max || lo_y > max {
                continue;
            }
            for cy in to_cell(lo_y)..=to_cell(hi_y) {
                for cx in to_cell(lo_x)..=to_cell(hi_x) {
                    bins[cy * cells_per_side + cx].push(f as u32);
                }
            }
        }
        Self {
            triangles,
            cell,
            cells_per_side,
            bins,
        }
    }

    /// Smallest depth of any front-facing triangle whose closed image-space
    /// footprint contains `p` (`+inf` if none). `p` must lie inside the image.
    fn nearest_depth(&self, p: Vec2<T>) -> T {
        let cx = p.x.floor().to_usize().unwrap_or(0) / self.cell;
        let cy = p.y.floor().to_usize().unwrap_or(0) / self.cell;
        let idx = cy.min(self.cells_per_side - 1) * self.cells_per_side + cx.min(self.cells_per_side - 1);
        let mut best = T::infinity();
        for &f in &self.bins[idx] {
            let tri = self.triangles[f as usize].as_ref().expect("binned");
            let [a, b, c] = tri.pts;
            let e = [edge(b, c, p), edge(c, a, p), edge(a, b, p)];
            if e.iter().any(|&x| x < T::zero()) {
                continue;
            }
            let sum = e[0] + e[1] + e[2];
            if !(sum > T::zero()) {
                continue;
            }
            let z = (e[0] * tri.depth[0] + e[1] * tri.depth[1] + e[2] * tri.depth[2]) / sum;
            best = best.min(z);
        }
        best
    }
}

/// Maps every texel of a `tex_res × tex_res` UV layout to its image position
/// under `cam` and decides visibility.
///
/// A texel is visible when its surface point lies on a front-facing triangle,
/// projects inside the image, is no deeper than the mesh's own depth at that
/// exact image position plus `1e-4 ×` the mesh depth extent, and at least one
/// of its bilinear taps lands on a covered pixel.
pub fn texel_correspondences<T: Real>(
    mesh: &Mesh<T>,
    cam: &CameraParams<T>,
    image: ImageSpec,
    tex_res: usize,
    opts: RasterOptions,
) -> Result<CorrespondenceMap<T>> {
    if tex_res == 0 {
        return Err(Error::invalid("tex_res", "must be positive"));
    }
    let surface = uv_surface_points(mesh, tex_res)?;
    let res = image.resolution;
    let pixel_mask = rasterize_with(mesh, cam, image, opts).mask;
    let query = DepthQuery::new(project_triangles(mesh, cam), res);
    let eps = T::lit(DEPTH_EPSILON_FRACTION) * mesh.z_extent();
    let limit = T::of_usize(res);
    let tap_probe = Image {
        resolution: res,
        pixels: vec![[T::one(); 3]; res * res],
    };

    let per_texel: Vec<([T; 2], bool)> = surface
        .par_iter()
        .map(|sp| {
            let Some(sp) = sp else {
                return ([T::zero(); 2], false);
            };
            let face = mesh.faces[sp.face as usize];
            let point = (0..3).fold(Vec3::zero(), |acc, k| acc + mesh.vertices[face[k] as usize] * sp.bary[k]);
            let q = cam.project(point);
            let xy = [q.x, q.y];
            let front = query.triangles[sp.face as usize].is_some();
            let in_frame = q.x >= T::zero() && q.x < limit && q.y >= T::zero() && q.y < limit;
            if !(front && in_frame) {
                return (xy, false);
            }
            let p = Vec2 { x: q.x, y: q.y };
            let unoccluded = q.z <= query.nearest_depth(p) + eps;
            let has_tap = tap_probe.sample_masked(q.x, q.y, &pixel_mask).is_some();
            (xy, unoccluded && has_tap)
        })
        .collect();

    let (img_xy, visible) = per_texel.into_iter().unzip();
    Ok(CorrespondenceMap {
        tex_res,
        image_res: res,
        img_xy,
        visible,
        pixel_mask,
    })
}

/// Samples `img` at each visible texel's image position.
pub fn steal_texture<T: Real>(img: &Image<T>, corr: &CorrespondenceMap<T>) -> Result<PartialTexture<T>> {
    if img.resolution != corr.image_res {
        return Err(Error::ResolutionMismatch(format!(
            "image is {}px, correspondence map was built for {}px",
            img.resolution, corr.image_res
        )));
    }
    let texels = corr
        .img_xy
        .par_iter()
        .zip(&corr.visible)
        .map(|(xy, &vis)| {
            if !vis {
                return [T::zero(); 3];
            }
            img.sample_masked(xy[0], xy[1], &corr.pixel_mask)
                .unwrap_or_else(|| img.sample(xy[0], xy[1]))
        })
        .collect();
    Ok(PartialTexture {
        res: corr.tex_res,
        texels,
        visible: corr.visible.clone(),
    })
}

/// Mean squared per-channel difference over texels visible in both textures,
/// with the overlap size. An empty overlap gives `(0, 0)`.
pub fn consistency_loss<T: Real>(a: &PartialTexture<T>, b: &PartialTexture<T>) -> Result<(T, usize)> {
    if a.res != b.res {
        return Err(Error::ResolutionMismatch(format!("textures are {}px and {}px", a.res, b.res)));
    }
    let mut sum = T::zero();
    let mut count = 0usize;
    for i in 0..a.texels.len() {
        if a.visible[i] && b.visible[i] {
            for ch in 0..3 {
                let d = a.texels[i][ch] - b.texels[i][ch];
                sum = sum + d * d;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Ok((T::zero(), 0));
    }
    Ok((sum / T::of_usize(3 * count), count))
}
