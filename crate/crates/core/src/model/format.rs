//! `FCND` asset container.
//!
//! Layout (all little-endian): magic `FCND`, `u32` version, then one array per
//! field in [`FIELDS`] order. Each array is `u32` rank, `rank` × `u32` dims,
//! then the elements: `f32`, except `faces` and `eye_vertex_ids` which are
//! `u32`. See `docs/formats.md`.

use std::path::Path;
use std::sync::Arc;

use super::assets::{FaceUvs, HeadModelAssets, APPEARANCE_DIM, EXPRESSION_DIM, SHAPE_DIM};
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"FCND";
pub const VERSION: u32 = 1;

pub const FIELDS: [&str; 10] = [
    "template_vertices",
    "faces",
    "shape_basis",
    "expression_basis",
    "jaw_weights",
    "jaw_joint",
    "eye_vertex_ids",
    "uv_coords",
    "albedo_mean",
    "albedo_basis",
];

pub fn to_bytes<T: Real>(assets: &HeadModelAssets<T>) -> Vec<u8> {
    let v = assets.vertex_count();
    let f = assets.face_count();
    let t = assets.tex_res;
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION);
    w.f32s(&[v, 3], assets.template.iter().flat_map(|p| p.to_array()));
    w.u32s(&[f, 3], assets.faces.iter().flatten().copied());
    w.f32s(&[v, 3, SHAPE_DIM], assets.shape_basis.iter().copied());
    w.f32s(&[v, 3, EXPRESSION_DIM], assets.expression_basis.iter().copied());
    w.f32s(&[v], assets.jaw_weights.iter().copied());
    w.f32s(&[3], assets.jaw_joint.to_array());
    w.u32s(&[2], assets.eye_vertex_ids);
    w.f32s(&[f, 3, 2], assets.uv_coords.iter().flatten().flatten().copied());
    w.f32s(&[t, t, 3], assets.albedo_mean.iter().copied());
    w.f32s(&[t, t, 3, APPEARANCE_DIM], assets.albedo_basis.iter().copied());
    w.0
}

pub fn save<T: Real>(assets: &HeadModelAssets<T>, path: impl AsRef<Path>) -> Result<()> {
    crate::formats::write_file(path, &to_bytes(assets))
}

/// Reads and validates an asset file.
pub fn load_assets<T: Real>(path: impl AsRef<Path>) -> Result<HeadModelAssets<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}

pub fn from_bytes<T: Real>(bytes: &[u8]) -> Result<HeadModelAssets<T>> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Format("bad magic, expected FCND".into()));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }

    let (dims, template) = r.f32_array::<T>(FIELDS[0])?;
    expect_shape(FIELDS[0], &dims, &[None, Some(3)])?;
    let v = dims[0];
    let (dims, faces) = r.u32_array(FIELDS[1])?;
    expect_shape(FIELDS[1], &dims, &[None, Some(3)])?;
    let f = dims[0];
    let (dims, shape_basis) = r.f32_array::<T>(FIELDS[2])?;
    expect_shape(FIELDS[2], &dims, &[Some(v), Some(3), Some(SHAPE_DIM)])?;
    let (dims, expression_basis) = r.f32_array::<T>(FIELDS[3])?;
    expect_shape(FIELDS[3], &dims, &[Some(v), Some(3), Some(EXPRESSION_DIM)])?;
    let (dims, jaw_weights) = r.f32_array::<T>(FIELDS[4])?;
    expect_shape(FIELDS[4], &dims, &[Some(v)])?;
    let (dims, jaw_joint) = r.f32_array::<T>(FIELDS[5])?;
    expect_shape(FIELDS[5], &dims, &[Some(3)])?;
    let (dims, eyes) = r.u32_array(FIELDS[6])?;
    expect_shape(FIELDS[6], &dims, &[Some(2)])?;
    let (dims, uv) = r.f32_array::<T>(FIELDS[7])?;
    expect_shape(FIELDS[7], &dims, &[Some(f), Some(3), Some(2)])?;
    let (dims, albedo_mean) = r.f32_array::<T>(FIELDS[8])?;
    expect_shape(FIELDS[8], &dims, &[None, None, Some(3)])?;
    let t = dims[0];
    if dims[1] != t {
        return Err(Error::dim(FIELDS[8], format!("square texture ({t} x {t})"), format!("{} x {}", dims[0], dims[1])));
    }
    let (dims, albedo_basis) = r.f32_array::<T>(FIELDS[9])?;
    expect_shape(FIELDS[9], &dims, &[Some(t), Some(t), Some(3), Some(APPEARANCE_DIM)])?;
    if r.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
    }

    let assets = HeadModelAssets {
        template: template.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect(),
        faces: faces.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect::<Vec<_>>().into(),
        shape_basis,
        expression_basis,
        jaw_weights,
        jaw_joint: Vec3::new(jaw_joint[0], jaw_joint[1], jaw_joint[2]),
        eye_vertex_ids: [eyes[0], eyes[1]],
        uv_coords: Arc::from(
            uv.chunks_exact(6)
                .map(|c| [[c[0], c[1]], [c[2], c[3]], [c[4], c[5]]])
                .collect::<Vec<FaceUvs<T>>>(),
        ),
        tex_res: t,
        albedo_mean,
        albedo_basis,
    };
    assets.validate()?;
    Ok(assets)
}

fn expect_shape(field: &'static str, dims: &[usize], expected: &[Option<usize>]) -> Result<()> {
    let ok = dims.len() == expected.len() && dims.iter().zip(expected).all(|(d, e)| e.is_none_or(|e| e == *d));
    if ok {
        return Ok(());
    }
    let show = expected
        .iter()
        .map(|e| e.map_or("*".to_string(), |x| x.to_string()))
        .collect::<Vec<_>>()
        .join(" x ");
    Err(Error::dim(field, show, format!("{dims:?}")))
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn dims(&mut self, dims: &[usize]) {
        self.u32(dims.len() as u32);
        for &d in dims {
            self.u32(d as u32);
        }
    }

    fn f32s<T: Real>(&mut self, dims: &[usize], data: impl IntoIterator<Item = T>) {
        self.dims(dims);
        for x in data {
            self.0.extend_from_slice(&x.to_f32_lossy().to_le_bytes());
        }
    }

    fn u32s(&mut self, dims: &[usize], data: impl IntoIterator<Item = u32>) {
        self.dims(dims);
        for x in data {
            self.u32(x);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let Some(end) = end else {
            return Err(Error::Format(format!(
                "truncated while reading {field} (need {n} bytes at offset {}, file has {})",
                self.pos,
                self.buf.len()
            )));
        };
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        let b = self.take(4, field)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn dims(&mut self, field: &'static str) -> Result<(Vec<usize>, usize)> {
        let rank = self.u32(field)? as usize;
        if rank > 8 {
            return Err(Error::Format(format!("{field}: implausible rank {rank}")));
        }
        let mut dims = Vec::with_capacity(rank);
        let mut count: usize = 1;
        for _ in 0..rank {
            let d = self.u32(field)? as usize;
            count = count
                .checked_mul(d)
                .ok_or_else(|| Error::Format(format!("{field}: element count overflows")))?;
            dims.push(d);
        }
        let bytes = count
            .checked_mul(4)
            .filter(|&b| b <= self.buf.len() - self.pos)
            .ok_or_else(|| {
                Error::Format(format!("truncated while reading {field}: header claims {count} elements"))
            })?;
        Ok((dims, bytes / 4))
    }

    fn f32_array<T: Real>(&mut self, field: &'static str) -> Result<(Vec<usize>, Vec<T>)> {
        let (dims, n) = self.dims(field)?;
        let raw = self.take(n * 4, field)?;
        let mut out = Vec::with_capacity(n);
        for c in raw.chunks_exact(4) {
            let x = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            if !x.is_finite() {
                return Err(Error::invalid(field, "non-finite value"));
            }
            out.push(T::of_f32(x));
        }
        Ok((dims, out))
    }

    fn u32_array(&mut self, field: &'static str) -> Result<(Vec<usize>, Vec<u32>)> {
        let (dims, n) = self.dims(field)?;
        let raw = self.take(n * 4, field)?;
        Ok((dims, raw.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect()))
    }
}
