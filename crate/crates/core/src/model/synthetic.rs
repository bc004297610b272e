//! Procedural stand-in for licensed head-model data.
//!
//! The template is a latitude/longitude triangulation of a head-proportioned
//! ellipsoid with a nose bump, mirror symmetric about `x = 0` by construction.
//! Blendshape and albedo bases are random low-order polynomial fields over the
//! unit direction, so displacements vary smoothly over the surface; column
//! norms decay geometrically like a PCA spectrum. All values are rounded to
//! `f32` so that a save/load cycle is lossless.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::assets::{FaceUvs, HeadModelAssets, APPEARANCE_DIM, EXPRESSION_DIM, SHAPE_DIM};
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::rng::substream;
use crate::scalar::Real;

const RADII: [f64; 3] = [0.078, 0.105, 0.095];
const EYE_POLAR: f64 = PI / 2.0 - 0.25;
const EYE_AZIMUTH: f64 = 0.45;
const JAW_JOINT: [f64; 3] = [0.0, -0.015, -0.02];

const SHAPE_RMS: f64 = 0.004;
const SHAPE_DECAY: f64 = 0.95;
const EXPRESSION_RMS: f64 = 0.003;
const EXPRESSION_DECAY: f64 = 0.93;
const ALBEDO_RMS: f64 = 0.04;
const ALBEDO_DECAY: f64 = 0.93;

const STREAM_SHAPE: u64 = 1;
const STREAM_EXPRESSION: u64 = 2;
const STREAM_ALBEDO: u64 = 3;

/// Generates a complete, validated asset set.
///
/// `v_target` is matched approximately (the grid has `2 + rings * 2 * rings`
/// vertices); `tex_res` must be a power of two no smaller than 32.
pub fn gen_synthetic_assets<T: Real>(seed: u64, v_target: usize, tex_res: usize) -> Result<HeadModelAssets<T>> {
    if v_target < 100 {
        return Err(Error::TooFewVertices(v_target));
    }
    if !tex_res.is_power_of_two() || tex_res < 32 {
        return Err(Error::invalid("tex_res", format!("{tex_res} is not a power of two >= 32")));
    }
    let rings = (((v_target - 2) as f64 / 2.0).sqrt().round() as usize).max(7);
    let grid = LatLongGrid::new(rings, 2 * rings);

    let dirs = grid.directions();
    let template: Vec<[f64; 3]> = dirs.iter().map(|&d| head_surface(d)).collect();
    let (faces, uvs) = grid.faces(&template);

    let shape_basis = smooth_basis(seed, STREAM_SHAPE, &dirs, SHAPE_DIM, SHAPE_RMS, SHAPE_DECAY, |_| 1.0);
    let expression_basis = smooth_basis(
        seed,
        STREAM_EXPRESSION,
        &dirs,
        EXPRESSION_DIM,
        EXPRESSION_RMS,
        EXPRESSION_DECAY,
        |i| lower_face_mask(template[i]),
    );
    let jaw_weights: Vec<f64> = template.iter().map(|&p| jaw_weight(p)).collect();
    let eye_vertex_ids = grid.eye_vertices();

    let texel_dirs: Vec<[f64; 3]> = (0..tex_res * tex_res)
        .map(|i| {
            let (row, col) = (i / tex_res, i % tex_res);
            uv_to_direction((col as f64 + 0.5) / tex_res as f64, (row as f64 + 0.5) / tex_res as f64)
        })
        .collect();
    let albedo_mean: Vec<f64> = texel_dirs.iter().flat_map(|&d| mean_albedo(d)).collect();
    let albedo_basis = smooth_color_basis(seed, &texel_dirs);

    let r = |x: f64| T::of_f32(x as f32);
    let assets = HeadModelAssets {
        template: template.iter().map(|p| Vec3::new(r(p[0]), r(p[1]), r(p[2]))).collect(),
        faces: faces.into(),
        shape_basis: shape_basis.into_iter().map(r).collect(),
        expression_basis: expression_basis.into_iter().map(r).collect(),
        jaw_weights: jaw_weights.into_iter().map(r).collect(),
        jaw_joint: Vec3::new(r(JAW_JOINT[0]), r(JAW_JOINT[1]), r(JAW_JOINT[2])),
        eye_vertex_ids,
        uv_coords: Arc::from(
            uvs.iter()
                .map(|c| c.map(|uv| uv.map(r)))
                .collect::<Vec<FaceUvs<T>>>(),
        ),
        tex_res,
        albedo_mean: albedo_mean.into_iter().map(r).collect(),
        albedo_basis: albedo_basis.into_iter().map(r).collect(),
    };
    assets.validate()?;
    Ok(assets)
}

/// Vertex layout: north pole, `rings` rings of `segments` vertices (north to
/// south), south pole. Azimuth `2π j / segments − π` puts the UV seam at the
/// back of the head and the face at `u = 0.5`.
struct LatLongGrid {
    rings: usize,
    segments: usize,
}

impl LatLongGrid {
    fn new(rings: usize, segments: usize) -> Self {
        debug_assert!(segments.is_multiple_of(2));
        Self { rings, segments }
    }

    fn vertex_count(&self) -> usize {
        2 + self.rings * self.segments
    }

    fn ring_vertex(&self, ring: usize, seg: usize) -> u32 {
        (1 + (ring - 1) * self.segments + seg % self.segments) as u32
    }

    fn polar(&self, ring: usize) -> f64 {
        PI * ring as f64 / (self.rings + 1) as f64
    }

    fn directions(&self) -> Vec<[f64; 3]> {
        let s = self.segments;
        let mut out = Vec::with_capacity(self.vertex_count());
        out.push([0.0, 1.0, 0.0]);
        for ring in 1..=self.rings {
            let (sp, cp) = self.polar(ring).sin_cos();
            let row: Vec<[f64; 3]> = (0..s)
                .map(|j| {
                    // Mirror the right half from the left half so the
                    // template is exactly symmetric in x.
                    let (jj, sign) = if j > s / 2 { (s - j, -1.0) } else { (j, 1.0) };
                    let az = 2.0 * PI * jj as f64 / s as f64 - PI;
                    let (sa, ca) = az.sin_cos();
                    let x = if jj == 0 || jj == s / 2 { 0.0 } else { sign * sp * sa };
                    [x, cp, sp * ca]
                })
                .collect();
            out.extend(row);
        }
        out.push([0.0, -1.0, 0.0]);
        out
    }

    fn faces(&self, positions: &[[f64; 3]]) -> (Vec<[u32; 3]>, Vec<FaceUvs<f64>>) {
        let (r, s) = (self.rings, self.segments);
        let south = (self.vertex_count() - 1) as u32;
        let v_of = |ring: usize| ring as f64 / (r + 1) as f64;
        let u_of = |seg: usize| seg as f64 / s as f64;
        let mut faces = Vec::with_capacity(2 * r * s);
        let mut uvs = Vec::with_capacity(2 * r * s);
        for j in 0..s {
            let mid = (j as f64 + 0.5) / s as f64;
            faces.push([0, self.ring_vertex(1, j), self.ring_vertex(1, j + 1)]);
            uvs.push([[mid, 0.0], [u_of(j), v_of(1)], [u_of(j + 1), v_of(1)]]);
            for ring in 1..r {
                let (a, b) = (self.ring_vertex(ring, j), self.ring_vertex(ring, j + 1));
                let (c, d) = (self.ring_vertex(ring + 1, j), self.ring_vertex(ring + 1, j + 1));
                let (ua, ub) = (u_of(j), u_of(j + 1));
                let (va, vb) = (v_of(ring), v_of(ring + 1));
                faces.push([a, c, d]);
                uvs.push([[ua, va], [ua, vb], [ub, vb]]);
                faces.push([a, d, b]);
                uvs.push([[ua, va], [ub, vb], [ub, va]]);
            }
            faces.push([self.ring_vertex(r, j), south, self.ring_vertex(r, j + 1)]);
            uvs.push([[u_of(j), v_of(r)], [mid, 1.0], [u_of(j + 1), v_of(r)]]);
        }
        // Orient every face outward (the surface is star-shaped about the origin).
        for (face, uv) in faces.iter_mut().zip(uvs.iter_mut()) {
            let p = face.map(|i| positions[i as usize]);
            let e1 = sub(p[1], p[0]);
            let e2 = sub(p[2], p[0]);
            let n = cross(e1, e2);
            let c = [
                p[0][0] + p[1][0] + p[2][0],
                p[0][1] + p[1][1] + p[2][1],
                p[0][2] + p[1][2] + p[2][2],
            ];
            if dot(n, c) < 0.0 {
                face.swap(1, 2);
                uv.swap(1, 2);
            }
        }
        (faces, uvs)
    }

    fn eye_vertices(&self) -> [u32; 2] {
        let s = self.segments;
        let ring = ((EYE_POLAR / PI) * (self.rings + 1) as f64).round() as usize;
        let ring = ring.clamp(1, self.rings);
        let offset = ((EYE_AZIMUTH * s as f64 / (2.0 * PI)).round() as usize).max(1);
        let left = s / 2 + offset;
        [self.ring_vertex(ring, left), self.ring_vertex(ring, s - left)]
    }
}

/// Inverse of the lat/long UV layout.
pub(crate) fn uv_to_direction(u: f64, v: f64) -> [f64; 3] {
    let (sp, cp) = (PI * v).sin_cos();
    let (sa, ca) = (2.0 * PI * u - PI).sin_cos();
    [sp * sa, cp, sp * ca]
}

fn head_surface(d: [f64; 3]) -> [f64; 3] {
    let nose = normalize([0.0, -0.1, 1.0]);
    let bump = 1.0 + 0.12 * gaussian(d, nose, 0.12);
    [RADII[0] * d[0] * bump, RADII[1] * d[1] * bump, RADII[2] * d[2] * bump]
}

fn jaw_weight(p: [f64; 3]) -> f64 {
    smoothstep(0.0, 0.035, JAW_JOINT[1] - p[1]) * smoothstep(-0.03, 0.02, p[2])
}

fn lower_face_mask(p: [f64; 3]) -> f64 {
    smoothstep(0.035, -0.03, p[1]) * smoothstep(-0.02, 0.05, p[2])
}

fn mean_albedo(d: [f64; 3]) -> [f64; 3] {
    let skin = [0.80, 0.60, 0.50];
    let hair_c = [0.26, 0.18, 0.13];
    let lips_c = [0.68, 0.34, 0.34];
    let brow_c = [0.35, 0.25, 0.20];
    let eye_c = [0.30, 0.25, 0.24];

    let shade = 1.0 - 0.05 * d[1] - 0.04 * d[0] * d[0];
    let mut c = skin.map(|x| x * shade);
    let hair = smoothstep(0.45, 0.7, d[1]).max(smoothstep(-0.1, -0.45, d[2]) * smoothstep(-0.4, 0.0, d[1]));
    mix(&mut c, hair_c, hair);
    mix(&mut c, lips_c, gaussian(d, normalize([0.0, -0.42, 0.9]), 0.1));
    for side in [1.0, -1.0] {
        let (sp, cp) = EYE_POLAR.sin_cos();
        let (sa, ca) = (side * EYE_AZIMUTH).sin_cos();
        let eye = [sp * sa, cp, sp * ca];
        mix(&mut c, eye_c, 0.8 * gaussian(d, eye, 0.08));
        let brow = normalize([eye[0] * 1.05, eye[1] + 0.13, eye[2]]);
        mix(&mut c, brow_c, 0.7 * gaussian(d, brow, 0.07));
    }
    c.map(|x| x.clamp(0.0, 1.0))
}

/// Monomials `x^a y^b z^c` with `a + b + c <= 3`.
fn monomials(d: [f64; 3]) -> [f64; 20] {
    let mut out = [0.0; 20];
    let mut k = 0;
    for total in 0..=3i32 {
        for a in 0..=total {
            for b in 0..=(total - a) {
                let c = total - a - b;
                out[k] = d[0].powi(a) * d[1].powi(b) * d[2].powi(c);
                k += 1;
            }
        }
    }
    out
}

/// Column `k` is a random smooth displacement field (scaled per point by
/// `mask`) normalized to `rms * sqrt(n_points) * decay^k`.
fn smooth_basis(
    seed: u64,
    stream: u64,
    dirs: &[[f64; 3]],
    dim: usize,
    rms: f64,
    decay: f64,
    mask: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let mut rng = substream(seed, stream);
    let feats: Vec<[f64; 20]> = dirs.iter().map(|&d| monomials(d)).collect();
    let n = dirs.len();
    let mut out = vec![0.0; n * 3 * dim];
    let mut column = vec![0.0; n * 3];
    for k in 0..dim {
        let coeffs: Vec<f64> = (0..60).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for (i, f) in feats.iter().enumerate() {
            let m = mask(i);
            for axis in 0..3 {
                let c = &coeffs[axis * 20..axis * 20 + 20];
                column[i * 3 + axis] = m * f.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        let target = rms * (n as f64).sqrt() * decay.powi(k as i32);
        let norm = column.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s = if norm > 0.0 { target / norm } else { 0.0 };
        for (i, x) in column.iter().enumerate() {
            out[i * dim + k] = x * s;
        }
    }
    out
}

/// Albedo basis: per column, a smooth luminance field plus a weaker smooth
/// chroma field.
fn smooth_color_basis(seed: u64, texel_dirs: &[[f64; 3]]) -> Vec<f64> {
    let mut rng = substream(seed, STREAM_ALBEDO);
    let n = texel_dirs.len();
    let feats: Vec<[f64; 20]> = texel_dirs.iter().map(|&d| monomials(d)).collect();
    let mut out = vec![0.0; n * 3 * APPEARANCE_DIM];
    let mut column = vec![0.0; n * 3];
    for k in 0..APPEARANCE_DIM {
        let lum: Vec<f64> = (0..20).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let chroma: Vec<f64> = (0..60).map(|_| 0.3 * rng.sample::<f64, _>(StandardNormal)).collect();
        let tint: [f64; 3] = [1.0, 0.8 + 0.1 * rng.random::<f64>(), 0.7 + 0.1 * rng.random::<f64>()];
        for (i, f) in feats.iter().enumerate() {
            let l: f64 = f.iter().zip(&lum).map(|(a, b)| a * b).sum();
            for ch in 0..3 {
                let c: f64 = f.iter().zip(&chroma[ch * 20..ch * 20 + 20]).map(|(a, b)| a * b).sum();
                column[i * 3 + ch] = tint[ch] * l + c;
            }
        }
        let target = ALBEDO_RMS * ((n * 3) as f64).sqrt() * ALBEDO_DECAY.powi(k as i32);
        let norm = column.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s = if norm > 0.0 { target / norm } else { 0.0 };
        for (i, x) in column.iter().enumerate() {
            out[i * APPEARANCE_DIM + k] = x * s;
        }
    }
    out
}

fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn gaussian(d: [f64; 3], center: [f64; 3], sigma: f64) -> f64 {
    let q = sub(d, center);
    (-dot(q, q) / (2.0 * sigma * sigma)).exp()
}

fn mix(c: &mut [f64; 3], target: [f64; 3], t: f64) {
    for (x, y) in c.iter_mut().zip(target) {
        *x += (y - *x) * t;
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}
