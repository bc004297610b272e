use std::sync::Arc;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scalar::Real;

pub const SHAPE_DIM: usize = 100;
pub const EXPRESSION_DIM: usize = 50;
pub const POSE_DIM: usize = 6;
pub const APPEARANCE_DIM: usize = 50;

/// Per-face-corner texture coordinates, `[face][corner] = (u, v)`.
pub type FaceUvs<T> = [[T; 2]; 3];

/// Statistical head model: template, blendshape bases, jaw skinning, UV layout
/// and a linear albedo space.
///
/// Bases are stored vertex-major: `shape_basis[(v * 3 + axis) * SHAPE_DIM + k]`,
/// and likewise for the expression basis. Albedo arrays are texel-major:
/// `albedo_basis[((row * tex_res + col) * 3 + ch) * APPEARANCE_DIM + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadModelAssets<T> {
    pub template: Vec<Vec3<T>>,
    pub faces: Arc<[[u32; 3]]>,
    pub shape_basis: Vec<T>,
    pub expression_basis: Vec<T>,
    pub jaw_weights: Vec<T>,
    pub jaw_joint: Vec3<T>,
    /// Left then right eye center.
    pub eye_vertex_ids: [u32; 2],
    pub uv_coords: Arc<[FaceUvs<T>]>,
    pub tex_res: usize,
    pub albedo_mean: Vec<T>,
    pub albedo_basis: Vec<T>,
}

impl<T: Real> HeadModelAssets<T> {
    pub fn vertex_count(&self) -> usize {
        self.template.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    #[inline]
    pub fn shape_column(&self, vertex: usize, axis: usize) -> &[T] {
        let base = (vertex * 3 + axis) * SHAPE_DIM;
        &self.shape_basis[base..base + SHAPE_DIM]
    }

    #[inline]
    pub fn expression_column(&self, vertex: usize, axis: usize) -> &[T] {
        let base = (vertex * 3 + axis) * EXPRESSION_DIM;
        &self.expression_basis[base..base + EXPRESSION_DIM]
    }

    /// Checks every structural invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let v = self.template.len();
        if v == 0 {
            return Err(Error::invalid("template_vertices", "no vertices"));
        }
        if self.template.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("template_vertices", "non-finite value"));
        }
        if self.faces.is_empty() {
            return Err(Error::invalid("faces", "no faces"));
        }
        if let Some(f) = self.faces.iter().find(|f| f.iter().any(|&i| i as usize >= v)) {
            return Err(Error::invalid("faces", format!("index out of range in {f:?} (V = {v})")));
        }
        check_len("shape_basis", &self.shape_basis, v * 3 * SHAPE_DIM)?;
        check_finite("shape_basis", &self.shape_basis)?;
        check_len("expression_basis", &self.expression_basis, v * 3 * EXPRESSION_DIM)?;
        check_finite("expression_basis", &self.expression_basis)?;
        check_len("jaw_weights", &self.jaw_weights, v)?;
        if self
            .jaw_weights
            .iter()
            .any(|w| !(w.is_finite() && *w >= T::zero() && *w <= T::one()))
        {
            return Err(Error::invalid("jaw_weights", "entries must lie in [0, 1]"));
        }
        if !self.jaw_joint.is_finite() {
            return Err(Error::invalid("jaw_joint", "non-finite value"));
        }
        let [l, r] = self.eye_vertex_ids;
        if l as usize >= v || r as usize >= v {
            return Err(Error::invalid("eye_vertex_ids", "index out of range"));
        }
        if l == r {
            return Err(Error::invalid("eye_vertex_ids", "eye vertices must be distinct"));
        }
        if self.uv_coords.len() != self.faces.len() {
            return Err(Error::dim("uv_coords", self.faces.len(), self.uv_coords.len()));
        }
        let in_unit = |x: T| x.is_finite() && x >= T::zero() && x <= T::one();
        if self.uv_coords.iter().flatten().flatten().any(|&x| !in_unit(x)) {
            return Err(Error::invalid("uv_coords", "coordinates must lie in [0, 1]"));
        }
        let t = self.tex_res;
        if !(t.is_power_of_two() && t >= 1) {
            return Err(Error::invalid("albedo_mean", format!("texture side {t} is not a power of two")));
        }
        check_len("albedo_mean", &self.albedo_mean, t * t * 3)?;
        if self.albedo_mean.iter().any(|&x| !in_unit(x)) {
            return Err(Error::invalid("albedo_mean", "values must lie in [0, 1]"));
        }
        check_len("albedo_basis", &self.albedo_basis, t * t * 3 * APPEARANCE_DIM)?;
        check_finite("albedo_basis", &self.albedo_basis)?;
        Ok(())
    }
}

fn check_len<T>(field: &'static str, data: &[T], expected: usize) -> Result<()> {
    if data.len() != expected {
        return Err(Error::dim(field, format!("{expected} values"), data.len()));
    }
    Ok(())
}

fn check_finite<T: Real>(field: &'static str, data: &[T]) -> Result<()> {
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(field, "non-finite value"));
    }
    Ok(())
}
