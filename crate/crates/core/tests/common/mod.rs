//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod criteria;

use facecond::math::{Mat3, Vec3};
use facecond::model::FaceUvs;
use facecond::{CameraParams, Mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Camera under which model coordinates are pixel coordinates with y flipped.
pub fn pixel_camera() -> CameraParams<f64> {
    CameraParams::new(1.0, 0.0, 0.0).unwrap()
}

/// Mesh whose projection under [`pixel_camera`] puts vertex `k` at pixel
/// position `xy[k]` with depth `depth[k]`.
pub fn mesh_from_screen(points: &[([f64; 2], f64)], faces: Vec<[u32; 3]>) -> Mesh<f64> {
    let vertices = points
        .iter()
        .map(|&([x, y], d)| Vec3::new(x, -y, -d))
        .collect();
    Mesh::new(vertices, faces).unwrap()
}

/// Triangle soup plus a connected fan, spilling past the frame edges, with a
/// mix of windings so culling is exercised.
pub fn random_screen_mesh(seed: u64, res: usize, max_tris: usize) -> Mesh<f64> {
    let mut r = rng(seed);
    let p = res as f64;
    let n_tris = r.random_range(1..=max_tris);
    let mut points = Vec::new();
    let mut faces = Vec::new();
    let fan = r.random_range(0..=n_tris / 3);
    if fan > 0 {
        let c = [r.random_range(0.0..p), r.random_range(0.0..p)];
        points.push((c, r.random_range(0.5..2.0)));
        let radius = r.random_range(4.0..p / 2.0);
        for k in 0..fan {
            let a = std::f64::consts::TAU * k as f64 / fan as f64;
            points.push(([c[0] + radius * a.cos(), c[1] + radius * a.sin()], r.random_range(0.5..2.0)));
        }
        for k in 0..fan as u32 {
            let (a, b) = (1 + k, 1 + (k + 1) % fan as u32);
            faces.push([0, a, b]);
        }
    }
    while faces.len() < n_tris {
        let size = if r.random_bool(0.1) { p } else { r.random_range(2.0..p / 3.0) };
        let c = [r.random_range(-0.1 * p..1.1 * p), r.random_range(-0.1 * p..1.1 * p)];
        let base = points.len() as u32;
        for _ in 0..3 {
            let q = [c[0] + r.random_range(-size..size), c[1] + r.random_range(-size..size)];
            points.push((q, r.random_range(0.0..4.0)));
        }
        faces.push([base, base + 1, base + 2]);
    }
    mesh_from_screen(&points, faces)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleFragments {
    pub tri_id: Vec<Option<u32>>,
    pub depth: Vec<f64>,
}

/// Tests every pixel center against every triangle. Coverage uses the plain
/// edge functions of the counter-clockwise (y-up) ordering with the top-left
/// tie rule; nearest depth wins, ties to the lower index.
pub fn brute_force_raster(mesh: &Mesh<f64>, cam: &CameraParams<f64>, res: usize) -> OracleFragments {
    let proj: Vec<[f64; 3]> = mesh
        .vertices
        .iter()
        .map(|v| [cam.scale * v.x + cam.tx, -cam.scale * v.y + cam.ty, -v.z])
        .collect();
    let mut tri_id = vec![None; res * res];
    let mut depth = vec![f64::INFINITY; res * res];
    for (f, face) in mesh.faces.iter().enumerate() {
        let [a, b, c] = face.map(|i| proj[i as usize]);
        // y-down image: camera-facing means clockwise on screen.
        let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if !(area < 0.0) {
            continue;
        }
        // Reorder to positive image-space area.
        let [a, b, c] = [a, c, b];
        let area = -area;
        let top_left = |p: [f64; 3], q: [f64; 3]| {
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            dy < 0.0 || (dy == 0.0 && dx > 0.0)
        };
        let edges = [(b, c), (c, a), (a, b)];
        for row in 0..res {
            for col in 0..res {
                let (x, y) = (col as f64 + 0.5, row as f64 + 0.5);
                let mut w = [0.0; 3];
                let mut inside = true;
                for (k, (p, q)) in edges.iter().enumerate() {
                    let e = (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]);
                    if e < 0.0 || (e == 0.0 && !top_left(*p, *q)) {
                        inside = false;
                        break;
                    }
                    w[k] = e / area;
                }
                if !inside {
                    continue;
                }
                let z = w[0] * a[2] + w[1] * b[2] + w[2] * c[2];
                let i = row * res + col;
                if z < depth[i] {
                    depth[i] = z;
                    tri_id[i] = Some(f as u32);
                }
            }
        }
    }
    OracleFragments { tri_id, depth }
}

/// Concatenates meshes, offsetting face indices.
pub fn merge(meshes: &[Mesh<f64>]) -> Mesh<f64> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for m in meshes {
        let base = vertices.len() as u32;
        vertices.extend_from_slice(&m.vertices);
        faces.extend(m.faces.iter().map(|f| f.map(|i| i + base)));
    }
    Mesh::new(vertices, faces).unwrap()
}

pub fn translated(mesh: &Mesh<f64>, by: Vec3<f64>) -> Mesh<f64> {
    Mesh::new(mesh.vertices.iter().map(|&v| v + by).collect(), mesh.faces.clone()).unwrap()
}

pub fn random_rotation(r: &mut impl Rng) -> Mat3<f64> {
    let axis = loop {
        let a = Vec3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        if a.norm() > 0.1 && a.norm() <= 1.0 {
            break a.scale(1.0 / a.norm());
        }
    };
    let angle = r.random_range(0.0..std::f64::consts::TAU);
    Mat3::from_axis_angle(axis.scale(angle).to_array())
}

/// Surface point of the texel center `(col + 0.5, row + 0.5) / t` in the UV
/// layout: the lowest-index face whose UV triangle contains it, with the
/// barycentric weights of its corners.
pub fn brute_uv_lookup(uv: &[FaceUvs<f64>], t: usize) -> Vec<Option<(usize, [f64; 3])>> {
    let mut out = vec![None; t * t];
    for row in 0..t {
        for col in 0..t {
            let p = [(col as f64 + 0.5) / t as f64, (row as f64 + 0.5) / t as f64];
            for (f, tri) in uv.iter().enumerate() {
                if let Some(w) = barycentric_2d(*tri, p) {
                    out[row * t + col] = Some((f, w));
                    break;
                }
            }
        }
    }
    out
}

fn barycentric_2d(tri: [[f64; 2]; 3], p: [f64; 2]) -> Option<[f64; 3]> {
    let [a, b, c] = tri;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    if det == 0.0 {
        return None;
    }
    let w1 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
    let w2 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
    let w0 = 1.0 - w1 - w2;
    let eps = -1e-12;
    (w0 >= eps && w1 >= eps && w2 >= eps).then_some([w0, w1, w2])
}

/// Möller–Trumbore hit distance along `dir`, ignoring hits closer than `t_min`.
pub fn ray_hit(orig: Vec3<f64>, dir: Vec3<f64>, tri: [Vec3<f64>; 3], t_min: f64) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let pv = dir.cross(e2);
    let det = e1.dot(pv);
    if det.abs() < 1e-15 {
        return None;
    }
    let inv = 1.0 / det;
    let tv = orig - tri[0];
    let u = tv.dot(pv) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qv = tv.cross(e1);
    let v = dir.dot(qv) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(qv) * inv;
    (t > t_min).then_some(t)
}

/// Texel visibility by ray casting: the surface point must sit on a face whose
/// normal points at the camera (+z), project inside the frame, and reach the
/// camera along +z without hitting any other face.
pub fn raycast_visibility(mesh: &Mesh<f64>, cam: &CameraParams<f64>, res: usize, t: usize) -> Vec<bool> {
    let uv = mesh.uv.as_ref().expect("mesh has UVs");
    let lookup = brute_uv_lookup(uv, t);
    let up = Vec3::new(0.0, 0.0, 1.0);
    let normals: Vec<Vec3<f64>> = (0..mesh.faces.len())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            (b - a).cross(c - a)
        })
        .collect();
    lookup
        .iter()
        .map(|hit| {
            let Some((f, w)) = *hit else { return false };
            if normals[f].z <= 0.0 {
                return false;
            }
            let [a, b, c] = mesh.triangle(f);
            let p = a * w[0] + b * w[1] + c * w[2];
            let (x, y) = (cam.scale * p.x + cam.tx, -cam.scale * p.y + cam.ty);
            if !(x >= 0.0 && x < res as f64 && y >= 0.0 && y < res as f64) {
                return false;
            }
            (0..mesh.faces.len()).all(|g| g == f || ray_hit(p, up, mesh.triangle(g), 1e-9).is_none())
        })
        .collect()
}

/// Mean absolute per-channel difference over texels where `keep` holds.
pub fn masked_mae(a: &[[f64; 3]], b: &[[f64; 3]], keep: impl Fn(usize) -> bool) -> (f64, usize) {
    let mut sum = 0.0;
    let mut n = 0;
    for i in 0..a.len() {
        if keep(i) {
            sum += (0..3).map(|c| (a[i][c] - b[i][c]).abs()).sum::<f64>();
            n += 1;
        }
    }
    if n == 0 {
        (0.0, 0)
    } else {
        (sum / (3 * n) as f64, n)
    }
}
