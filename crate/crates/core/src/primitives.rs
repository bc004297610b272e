//! Procedural test meshes with outward-facing (counter-clockwise) faces.

use std::collections::HashMap;
use std::sync::Arc;

use crate::math::Vec3;
use crate::model::{FaceUvs, Mesh};
use crate::scalar::Real;

/// Geodesic sphere: an icosahedron with each face split four ways
/// `subdivisions` times, vertices pushed onto the sphere.
pub fn icosphere<T: Real>(subdivisions: u32, radius: T) -> Mesh<T> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let unit = |p: [f64; 3]| {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / n, p[1] / n, p[2] / n]
    };
    for v in verts.iter_mut() {
        *v = unit(*v);
    }
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: u32, b: u32, verts: &mut Vec<[f64; 3]>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a as usize], verts[b as usize]);
                verts.push(unit([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]));
                (verts.len() - 1) as u32
            })
        };
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = verts
        .into_iter()
        .map(|p| Vec3::new(T::lit(p[0]), T::lit(p[1]), T::lit(p[2])) * radius)
        .collect();
    Mesh::new(vertices, faces).expect("icosphere indices are in range")
}

/// Axis-aligned cube `[-h, h]³`, two triangles per side.
pub fn cube<T: Real>(half: T) -> Mesh<T> {
    let mut vertices = Vec::with_capacity(8);
    for i in 0..8u32 {
        let s = |bit: u32| if i & bit != 0 { half } else { -half };
        vertices.push(Vec3::new(s(1), s(2), s(4)));
    }
    let faces = vec![
        [0, 4, 6],
        [0, 6, 2], // -x
        [1, 3, 7],
        [1, 7, 5], // +x
        [0, 1, 5],
        [0, 5, 4], // -y
        [2, 6, 7],
        [2, 7, 3], // +y
        [0, 2, 3],
        [0, 3, 1], // -z
        [4, 5, 7],
        [4, 7, 6], // +z
    ];
    Mesh::new(vertices, faces).expect("cube indices are in range")
}

/// Square in the plane `z = 0` spanning `[-h, h]²`, facing `+z`, with UVs
/// mapping `(u, v) = (0, 0)` to the `(-h, +h)` corner (image top-left).
pub fn quad<T: Real>(half: T) -> Mesh<T> {
    let vertices = vec![
        Vec3::new(-half, half, T::zero()),
        Vec3::new(-half, -half, T::zero()),
        Vec3::new(half, -half, T::zero()),
        Vec3::new(half, half, T::zero()),
    ];
    let (o, z) = (T::one(), T::zero());
    let uv: Vec<FaceUvs<T>> = vec![[[z, z], [z, o], [o, o]], [[z, z], [o, o], [o, z]]];
    Mesh::new(vertices, vec![[0, 1, 2], [0, 2, 3]])
        .and_then(|m| m.with_uv(uv))
        .expect("quad is well formed")
}

/// Gives every face its own half of a grid cell in UV space, so the layout is
/// injective for any mesh.
pub fn per_face_atlas<T: Real>(face_count: usize) -> Arc<[FaceUvs<T>]> {
    let cells = face_count.div_ceil(2).max(1);
    let side = (cells as f64).sqrt().ceil() as usize;
    let size = 1.0 / side as f64;
    let inset = 0.02 * size;
    (0..face_count)
        .map(|f| {
            let cell = f / 2;
            let (u0, v0) = ((cell % side) as f64 * size, (cell / side) as f64 * size);
            let (u1, v1) = (u0 + size - inset, v0 + size - inset);
            let (u0, v0) = (u0 + inset, v0 + inset);
            let tri = if f % 2 == 0 {
                [[u0, v0], [u0, v1], [u1, v0]]
            } else {
                [[u1, v1], [u1, v0], [u0, v1]]
            };
            tri.map(|c| c.map(T::lit))
        })
        .collect::<Vec<_>>()
        .into()
}
