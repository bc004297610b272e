//! Head model evaluation: blendshapes, jaw articulation, global rotation and
//! vertex normals.

mod assets;
pub mod format;
pub mod synthetic;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use assets::{FaceUvs, HeadModelAssets, APPEARANCE_DIM, EXPRESSION_DIM, POSE_DIM, SHAPE_DIM};

use crate::error::{Error, Result};
use crate::math::{Mat3, Vec3};
use crate::scalar::Real;

/// Shape, pose and expression coefficients.
///
/// `theta[0..3]` is the global rotation and `theta[3..6]` the jaw rotation,
/// both axis-angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlameParams<T> {
    pub beta: Vec<T>,
    pub theta: [T; POSE_DIM],
    pub psi: Vec<T>,
}

impl<T: Real> FlameParams<T> {
    pub fn zeros() -> Self {
        Self {
            beta: vec![T::zero(); SHAPE_DIM],
            theta: [T::zero(); POSE_DIM],
            psi: vec![T::zero(); EXPRESSION_DIM],
        }
    }

    pub fn global_rotation(&self) -> [T; 3] {
        [self.theta[0], self.theta[1], self.theta[2]]
    }

    pub fn jaw_rotation(&self) -> [T; 3] {
        [self.theta[3], self.theta[4], self.theta[5]]
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.len() != SHAPE_DIM {
            return Err(Error::dim("beta", SHAPE_DIM, self.beta.len()));
        }
        if self.psi.len() != EXPRESSION_DIM {
            return Err(Error::dim("psi", EXPRESSION_DIM, self.psi.len()));
        }
        let finite = |xs: &[T]| xs.iter().all(|x| x.is_finite());
        if !finite(&self.beta) {
            return Err(Error::invalid("beta", "non-finite value"));
        }
        if !finite(&self.theta) {
            return Err(Error::invalid("theta", "non-finite value"));
        }
        if !finite(&self.psi) {
            return Err(Error::invalid("psi", "non-finite value"));
        }
        Ok(())
    }
}

/// Triangle mesh. Faces (and UVs, when present) are shared with the assets
/// that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    pub vertices: Vec<Vec3<T>>,
    pub faces: Arc<[[u32; 3]]>,
    pub uv: Option<Arc<[FaceUvs<T>]>>,
}

impl<T: Real> Mesh<T> {
    pub fn new(vertices: Vec<Vec3<T>>, faces: impl Into<Arc<[[u32; 3]]>>) -> Result<Self> {
        let faces = faces.into();
        let v = vertices.len();
        if faces.iter().flatten().any(|&i| i as usize >= v) {
            return Err(Error::invalid("faces", format!("index out of range (V = {v})")));
        }
        Ok(Self {
            vertices,
            faces,
            uv: None,
        })
    }

    pub fn with_uv(mut self, uv: impl Into<Arc<[FaceUvs<T>]>>) -> Result<Self> {
        let uv = uv.into();
        if uv.len() != self.faces.len() {
            return Err(Error::dim("uv_coords", self.faces.len(), uv.len()));
        }
        self.uv = Some(uv);
        Ok(self)
    }

    #[inline]
    pub fn triangle(&self, f: usize) -> [Vec3<T>; 3] {
        let [a, b, c] = self.faces[f];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Applies `rot` about the origin to every vertex.
    pub fn rotated(&self, rot: &Mat3<T>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| rot.mul_vec(p)).collect(),
            faces: self.faces.clone(),
            uv: self.uv.clone(),
        }
    }

    /// Depth extent `max(z) - min(z)` of the vertex set.
    pub fn z_extent(&self) -> T {
        let (lo, hi) = self
            .vertices
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)));
        if hi >= lo {
            hi - lo
        } else {
            T::zero()
        }
    }
}

fn check_params<T: Real>(assets: &HeadModelAssets<T>, params: &FlameParams<T>) -> Result<()> {
    params.validate()?;
    let v = assets.vertex_count();
    if assets.shape_basis.len() != v * 3 * SHAPE_DIM || assets.expression_basis.len() != v * 3 * EXPRESSION_DIM {
        return Err(Error::dim("shape_basis", "V x 3 x 100 / V x 3 x 50", "assets with other basis sizes"));
    }
    Ok(())
}

struct Posing<T> {
    jaw: Mat3<T>,
    global: Mat3<T>,
}

impl<T: Real> Posing<T> {
    fn new(params: &FlameParams<T>) -> Self {
        Self {
            jaw: Mat3::from_axis_angle(params.jaw_rotation()),
            global: Mat3::from_axis_angle(params.global_rotation()),
        }
    }
}

#[inline]
fn blend<T: Real>(column: &[T], coeffs: &[T]) -> T {
    column.iter().zip(coeffs).fold(T::zero(), |acc, (&b, &c)| acc + b * c)
}

fn posed_vertex<T: Real>(assets: &HeadModelAssets<T>, params: &FlameParams<T>, posing: &Posing<T>, v: usize) -> Vec3<T> {
    let t = assets.template[v];
    let offset = |axis: usize| {
        blend(assets.shape_column(v, axis), &params.beta) + blend(assets.expression_column(v, axis), &params.psi)
    };
    let mut p = Vec3::new(t.x + offset(0), t.y + offset(1), t.z + offset(2));

    // Jaw first: it is nested inside the head frame.
    let w = assets.jaw_weights[v];
    if w != T::zero() && !posing.jaw.is_identity() {
        let j = assets.jaw_joint;
        let rotated = posing.jaw.mul_vec(p - j) + j;
        p = p + (rotated - p) * w;
    }
    if !posing.global.is_identity() {
        p = posing.global.mul_vec(p);
    }
    p
}

/// Evaluates the head model: blendshapes, then the jaw rotation about the jaw
/// joint blended by the jaw weights, then the global rotation about the origin.
pub fn evaluate<T: Real>(assets: &HeadModelAssets<T>, params: &FlameParams<T>) -> Result<Mesh<T>> {
    check_params(assets, params)?;
    let posing = Posing::new(params);
    let vertices = (0..assets.vertex_count())
        .map(|v| posed_vertex(assets, params, &posing, v))
        .collect();
    Ok(Mesh {
        vertices,
        faces: assets.faces.clone(),
        uv: Some(assets.uv_coords.clone()),
    })
}

/// Posed positions of the two eye vertices only; identical to the matching
/// entries of [`evaluate`].
pub fn eye_positions<T: Real>(assets: &HeadModelAssets<T>, params: &FlameParams<T>) -> Result<[Vec3<T>; 2]> {
    check_params(assets, params)?;
    let posing = Posing::new(params);
    let [l, r] = assets.eye_vertex_ids;
    Ok([
        posed_vertex(assets, params, &posing, l as usize),
        posed_vertex(assets, params, &posing, r as usize),
    ])
}

/// Faces with area below this are ignored when accumulating normals.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// Angle-weighted vertex normals.
///
/// Each face contributes its unit normal weighted by the interior angle at the
/// vertex, so a vertex's normal does not depend on how adjacent planar regions
/// are split into triangles. Vertices touched only by degenerate faces get
/// `(0, 0, 1)`.
pub fn vertex_normals<T: Real>(mesh: &Mesh<T>) -> Vec<Vec3<T>> {
    let mut acc = vec![Vec3::zero(); mesh.vertices.len()];
    let min_area = T::lit(DEGENERATE_AREA);
    for (f, face) in mesh.faces.iter().enumerate() {
        let p = mesh.triangle(f);
        let n = (p[1] - p[0]).cross(p[2] - p[0]);
        let doubled_area = n.norm();
        if doubled_area * T::half() < min_area {
            continue;
        }
        let n = n * (T::one() / doubled_area);
        for k in 0..3 {
            let e1 = p[(k + 1) % 3] - p[k];
            let e2 = p[(k + 2) % 3] - p[k];
            let angle = e1.cross(e2).norm().atan2(e1.dot(e2));
            acc[face[k] as usize] += n * angle;
        }
    }
    let fallback = Vec3::new(T::zero(), T::zero(), T::one());
    acc.into_iter().map(|n| n.try_normalize().unwrap_or(fallback)).collect()
}
