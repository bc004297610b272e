//! Z-buffered triangle rasterization and the condition renderings built on it.
//!
//! Conventions: pixel centers at `(i + 0.5, j + 0.5)`; a pixel is covered when
//! its center lies strictly inside a triangle or on a top or left edge; back
//! faces (non-positive area as seen by the camera) are culled; depth ties go
//! to the lower triangle index. Under the weak-perspective camera, screen-space
//! barycentrics are exact, so no perspective correction is applied.

mod render;
mod stack;

pub use render::{decode_normal, encode_normal, interpolated_normals, render, render_normals, render_textured, Rendering, NORMAL_BACKGROUND};
pub use stack::{conditioning_stack, pool_2x2, ConditioningStack, StackLevel, CHANNEL_NAMES, STACK_CHANNELS};

use crate::camera::{CameraParams, ImageSpec};
use crate::model::Mesh;
use crate::scalar::Real;

/// `tri_id` of pixels no triangle covers.
pub const EMPTY: u32 = u32::MAX;

/// Per-pixel fragments of one rasterization pass, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderBuffers<T> {
    pub resolution: usize,
    /// `+inf` where empty.
    pub depth: Vec<T>,
    pub tri_id: Vec<u32>,
    /// Barycentric weights of the face's corners, in the face's own order.
    pub bary: Vec<[T; 3]>,
    /// Interpolated texture coordinates; zero when the mesh carries no UVs.
    pub uv: Vec<[T; 2]>,
    pub mask: Vec<bool>,
}

impl<T: Real> RenderBuffers<T> {
    fn empty(resolution: usize) -> Self {
        let n = resolution * resolution;
        Self {
            resolution,
            depth: vec![T::infinity(); n],
            tri_id: vec![EMPTY; n],
            bary: vec![[T::zero(); 3]; n],
            uv: vec![[T::zero(); 2]; n],
            mask: vec![false; n],
        }
    }

    pub fn covered(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RasterOptions {
    /// Worker threads; output is independent of this value.
    pub workers: usize,
    /// Square tile side in pixels.
    pub tile: usize,
}

impl Default for RasterOptions {
    fn default() -> Self {
        Self {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            tile: 16,
        }
    }
}

/// Twice the signed area of `(a, b, c)` in image coordinates, positive when the
/// triangle winds counter-clockwise as seen by the camera (i.e. counter-clockwise
/// with y pointing up).
#[inline]
pub fn camera_facing_area<T: Real>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> T {
    -edge(a, b, c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

/// Edge function of `p` against the directed edge `a → b` in image
/// coordinates (y down).
#[inline]
pub fn edge<T: Real>(a: Vec2<T>, b: Vec2<T>, p: Vec2<T>) -> T {
    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
}

/// [`edge`] evaluated with the endpoints in a canonical order, so that a
/// shared edge yields exactly opposite values for its two triangles.
#[inline]
pub fn edge_canonical<T: Real>(a: Vec2<T>, b: Vec2<T>, p: Vec2<T>) -> T {
    if (a.x, a.y) < (b.x, b.y) {
        edge(a, b, p)
    } else {
        -edge(b, a, p)
    }
}

/// Whether a zero edge value on `a → b` still counts as inside, for triangles
/// with positive image-space [`edge`] area.
#[inline]
pub fn is_top_left<T: Real>(a: Vec2<T>, b: Vec2<T>) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    dy < T::zero() || (dy == T::zero() && dx > T::zero())
}

/// Triangle in image space, corners reordered so its [`edge`] area is positive.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScreenTriangle<T> {
    pub pts: [Vec2<T>; 3],
    pub depth: [T; 3],
    /// `order[k]` is the face corner stored at position `k`.
    pub order: [usize; 3],
    pub top_left: [bool; 3],
}

impl<T: Real> ScreenTriangle<T> {
    /// `None` for back-facing, degenerate or non-finite triangles.
    pub fn front_facing(projected: [crate::math::Vec3<T>; 3]) -> Option<Self> {
        let p = projected.map(|q| Vec2 { x: q.x, y: q.y });
        if !projected.iter().all(|q| q.is_finite()) {
            return None;
        }
        if !(camera_facing_area(p[0], p[1], p[2]) > T::zero()) {
            return None;
        }
        Some(Self::ordered(p, projected.map(|q| q.z), [0, 2, 1]))
    }

    /// Accepts either winding; used for UV-space coverage.
    pub fn any_winding(p: [Vec2<T>; 3]) -> Option<Self> {
        let area = edge(p[0], p[1], p[2]);
        let zero = [T::zero(); 3];
        if area > T::zero() {
            Some(Self::ordered(p, zero, [0, 1, 2]))
        } else if area < T::zero() {
            Some(Self::ordered(p, zero, [0, 2, 1]))
        } else {
            None
        }
    }

    fn ordered(p: [Vec2<T>; 3], depth: [T; 3], order: [usize; 3]) -> Self {
        let pts = order.map(|i| p[i]);
        let top_left = [
            is_top_left(pts[1], pts[2]),
            is_top_left(pts[2], pts[0]),
            is_top_left(pts[0], pts[1]),
        ];
        Self {
            pts,
            depth: order.map(|i| depth[i]),
            order,
            top_left,
        }
    }

    /// Inclusive pixel index range whose centers can be covered, clipped to
    /// `[0, res)`. `None` when empty.
    pub fn pixel_bounds(&self, res: usize) -> Option<([usize; 2], [usize; 2])> {
        let half = T::half();
        let max = T::of_usize(res - 1);
        let lo_x = self.pts.iter().map(|p| p.x).fold(T::infinity(), T::min);
        let hi_x = self.pts.iter().map(|p| p.x).fold(T::neg_infinity(), T::max);
        let lo_y = self.pts.iter().map(|p| p.y).fold(T::infinity(), T::min);
        let hi_y = self.pts.iter().map(|p| p.y).fold(T::neg_infinity(), T::max);
        let x0 = (lo_x - half).ceil().max(T::zero());
        let x1 = (hi_x - half).floor().min(max);
        let y0 = (lo_y - half).ceil().max(T::zero());
        let y1 = (hi_y - half).floor().min(max);
        if x0 > x1 || y0 > y1 {
            return None;
        }
        Some((
            [x0.to_usize()?, x1.to_usize()?],
            [y0.to_usize()?, y1.to_usize()?],
        ))
    }

    /// Barycentric weights (in face corner order) when the pixel center at
    /// `p` is covered under the top-left rule.
    #[inline]
    pub fn cover(&self, p: Vec2<T>) -> Option<[T; 3]> {
        let [a, b, c] = self.pts;
        let e = [edge_canonical(b, c, p), edge_canonical(c, a, p), edge_canonical(a, b, p)];
        for k in 0..3 {
            if e[k] < T::zero() || (e[k] == T::zero() && !self.top_left[k]) {
                return None;
            }
        }
        let sum = e[0] + e[1] + e[2];
        if !(sum > T::zero()) {
            return None;
        }
        let mut w = [T::zero(); 3];
        for k in 0..3 {
            w[self.order[k]] = e[k] / sum;
        }
        Some(w)
    }

    /// Depth at barycentric weights given in face corner order.
    #[inline]
    pub fn depth_at(&self, w: [T; 3]) -> T {
        let mut z = T::zero();
        for k in 0..3 {
            z = z + w[self.order[k]] * self.depth[k];
        }
        z
    }
}

#[inline]
pub(crate) fn pixel_center<T: Real>(row: usize, col: usize) -> Vec2<T> {
    Vec2 {
        x: T::of_usize(col) + T::half(),
        y: T::of_usize(row) + T::half(),
    }
}

pub(crate) fn project_triangles<T: Real>(mesh: &Mesh<T>, cam: &CameraParams<T>) -> Vec<Option<ScreenTriangle<T>>> {
    let projected: Vec<_> = mesh.vertices.iter().map(|&p| cam.project(p)).collect();
    mesh.faces
        .iter()
        .map(|f| ScreenTriangle::front_facing(f.map(|i| projected[i as usize])))
        .collect()
}

/// Rasterizes with default options (all available cores).
pub fn rasterize<T: Real>(mesh: &Mesh<T>, cam: &CameraParams<T>, image: ImageSpec) -> RenderBuffers<T> {
    rasterize_with(mesh, cam, image, RasterOptions::default())
}

struct Tile<T> {
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
    depth: Vec<T>,
    tri_id: Vec<u32>,
    bary: Vec<[T; 3]>,
}

pub fn rasterize_with<T: Real>(
    mesh: &Mesh<T>,
    cam: &CameraParams<T>,
    image: ImageSpec,
    opts: RasterOptions,
) -> RenderBuffers<T> {
    let res = image.resolution;
    let tile = opts.tile.max(1);
    let tiles_per_side = res.div_ceil(tile);
    let triangles = project_triangles(mesh, cam);

    // Bin triangle indices per tile, preserving index order.
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); tiles_per_side * tiles_per_side];
    for (f, tri) in triangles.iter().enumerate() {
        let Some((xs, ys)) = tri.as_ref().and_then(|t| t.pixel_bounds(res)) else {
            continue;
        };
        for ty in ys[0] / tile..=ys[1] / tile {
            for tx in xs[0] / tile..=xs[1] / tile {
                bins[ty * tiles_per_side + tx].push(f as u32);
            }
        }
    }

    let run_tile = |index: usize| -> Tile<T> {
        let (ty, tx) = (index / tiles_per_side, index % tiles_per_side);
        let (x0, y0) = (tx * tile, ty * tile);
        let (w, h) = (tile.min(res - x0), tile.min(res - y0));
        let mut out = Tile {
            x0,
            y0,
            w,
            h,
            depth: vec![T::infinity(); w * h],
            tri_id: vec![EMPTY; w * h],
            bary: vec![[T::zero(); 3]; w * h],
        };
        for &f in &bins[index] {
            let tri = triangles[f as usize].as_ref().expect("binned triangles are front facing");
            let Some((xs, ys)) = tri.pixel_bounds(res) else { continue };
            let (cx0, cx1) = (xs[0].max(x0), xs[1].min(x0 + w - 1));
            let (cy0, cy1) = (ys[0].max(y0), ys[1].min(y0 + h - 1));
            for row in cy0..=cy1 {
                for col in cx0..=cx1 {
                    let Some(wts) = tri.cover(pixel_center(row, col)) else { continue };
                    let z = tri.depth_at(wts);
                    let i = (row - y0) * w + (col - x0);
                    if z < out.depth[i] {
                        out.depth[i] = z;
                        out.tri_id[i] = f;
                        out.bary[i] = wts;
                    }
                }
            }
        }
        out
    };

    let n_tiles = bins.len();
    let workers = opts.workers.clamp(1, n_tiles.max(1));
    let tiles: Vec<Tile<T>> = if workers == 1 {
        (0..n_tiles).map(run_tile).collect()
    } else {
        let mut slots: Vec<Option<Tile<T>>> = (0..n_tiles).map(|_| None).collect();
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|wk| {
                    let run_tile = &run_tile;
                    s.spawn(move || {
                        (wk..n_tiles)
                            .step_by(workers)
                            .map(|i| (i, run_tile(i)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, t) in h.join().expect("raster worker panicked") {
                    slots[i] = Some(t);
                }
            }
        });
        slots.into_iter().map(|t| t.expect("every tile rendered")).collect()
    };

    let mut buf = RenderBuffers::empty(res);
    for t in tiles {
        for r in 0..t.h {
            for c in 0..t.w {
                let src = r * t.w + c;
                if t.tri_id[src] == EMPTY {
                    continue;
                }
                let dst = (t.y0 + r) * res + t.x0 + c;
                buf.depth[dst] = t.depth[src];
                buf.tri_id[dst] = t.tri_id[src];
                buf.bary[dst] = t.bary[src];
                buf.mask[dst] = true;
            }
        }
    }
    if let Some(uvs) = &mesh.uv {
        for i in 0..res * res {
            if buf.mask[i] {
                let corners = &uvs[buf.tri_id[i] as usize];
                let w = buf.bary[i];
                let mut uv = [T::zero(); 2];
                for k in 0..3 {
                    uv[0] = uv[0] + w[k] * corners[k][0];
                    uv[1] = uv[1] + w[k] * corners[k][1];
                }
                buf.uv[i] = uv;
            }
        }
    }
    buf
}
