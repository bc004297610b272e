//! Parameter sampling, mini-batch interpolation and dataset generation.

mod dataset;
mod lighting;

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use dataset::{
    make_dataset, read_manifest, synthetic_target, validate_manifest, DatasetManifest, DatasetOptions, ManifestHeader,
    RecordEntry, MANIFEST_FILE,
};
pub use lighting::{lighting_bank, LIGHTING_BANK_SIZE};

use crate::camera::{camera_from_eye_points, CameraParams, EyeFraming, ImageSpec};
use crate::error::{Error, Result};
use crate::model::{eye_positions, FlameParams, HeadModelAssets, APPEARANCE_DIM, EXPRESSION_DIM, POSE_DIM, SHAPE_DIM};
use crate::rng::substream;
use crate::shading::{AppearanceParams, LightingParams, LIGHTING_DIM};

/// Leading components drawn from N(0, 1) for shape, expression and appearance.
pub const SAMPLED_COMPONENTS: usize = 3;
pub const HEAD_YAW_RANGE: (f64, f64) = (-PI / 8.0, PI / 8.0);
pub const JAW_OPEN_RANGE: (f64, f64) = (0.0, PI / 12.0);

/// Length of the flat conditioning vector `[β, θ, ψ, α, l, c]`.
pub const CONDITION_VECTOR_DIM: usize = SHAPE_DIM + POSE_DIM + EXPRESSION_DIM + APPEARANCE_DIM + LIGHTING_DIM + 3;

const STREAM_SAMPLE: u64 = 0;
const STREAM_INTERPOLATE: u64 = 1 << 40;

/// Everything that drives one image.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceParams {
    pub flame: FlameParams<f64>,
    pub appearance: AppearanceParams<f64>,
    pub lighting: LightingParams<f64>,
    pub cam: CameraParams<f64>,
    pub style_id: u64,
}

impl FaceParams {
    pub fn validate(&self) -> Result<()> {
        self.flame.validate()?;
        AppearanceParams::new(self.appearance.alpha.clone())?;
        LightingParams::from_flat(&self.lighting.to_flat())?;
        self.cam.validate()
    }

    /// `[β (100), θ (6), ψ (50), α (50), l (27), scale, tx, ty]`.
    pub fn condition_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(CONDITION_VECTOR_DIM);
        v.extend_from_slice(&self.flame.beta);
        v.extend_from_slice(&self.flame.theta);
        v.extend_from_slice(&self.flame.psi);
        v.extend_from_slice(&self.appearance.alpha);
        v.extend(self.lighting.to_flat());
        v.extend([self.cam.scale, self.cam.tx, self.cam.ty]);
        v
    }
}

/// JSON form of [`FaceParams`] with explicit field names and the image
/// resolution the camera was solved for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub resolution: usize,
    pub style_id: u64,
    pub beta: Vec<f64>,
    pub theta: Vec<f64>,
    pub psi: Vec<f64>,
    pub alpha: Vec<f64>,
    pub lighting: Vec<f64>,
    pub camera: CameraParams<f64>,
}

impl ParamsFile {
    pub fn new(p: &FaceParams, image: ImageSpec) -> Self {
        Self {
            resolution: image.resolution,
            style_id: p.style_id,
            beta: p.flame.beta.clone(),
            theta: p.flame.theta.to_vec(),
            psi: p.flame.psi.clone(),
            alpha: p.appearance.alpha.clone(),
            lighting: p.lighting.to_flat(),
            camera: p.cam,
        }
    }

    pub fn into_params(self) -> Result<(FaceParams, ImageSpec)> {
        let image = ImageSpec::new(self.resolution)?;
        let theta: [f64; POSE_DIM] = self
            .theta
            .as_slice()
            .try_into()
            .map_err(|_| Error::dim("theta", POSE_DIM, self.theta.len()))?;
        let p = FaceParams {
            flame: FlameParams {
                beta: self.beta,
                theta,
                psi: self.psi,
            },
            appearance: AppearanceParams::new(self.alpha)?,
            lighting: LightingParams::from_flat(&self.lighting)?,
            cam: self.camera,
            style_id: self.style_id,
        };
        p.validate()?;
        Ok((p, image))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn from_json(s: &str) -> Result<(FaceParams, ImageSpec)> {
        let f: ParamsFile = serde_json::from_str(s)?;
        f.into_params()
    }
}

/// Random generation protocol: the first three shape, expression and
/// appearance components from N(0, 1), the rest zero; head yaw uniform in
/// [-π/8, π/8]; jaw opening about x uniform in [0, π/12]; lighting from the
/// bundled bank; camera from the eye-centering solver. `style_id` is the seed.
pub fn sample_params(seed: u64, assets: &HeadModelAssets<f64>, image: ImageSpec) -> Result<FaceParams> {
    sample_params_framed(seed, assets, EyeFraming::default_for(image))
}

/// [`sample_params`] with explicit eye framing.
pub fn sample_params_framed(seed: u64, assets: &HeadModelAssets<f64>, framing: EyeFraming) -> Result<FaceParams> {
    let mut rng = substream(seed, STREAM_SAMPLE);
    sample_params_with(&mut rng, assets, framing, seed)
}

pub fn sample_params_with(
    rng: &mut ChaCha20Rng,
    assets: &HeadModelAssets<f64>,
    framing: EyeFraming,
    style_id: u64,
) -> Result<FaceParams> {
    let mut flame = FlameParams::zeros();
    let mut appearance = AppearanceParams::zeros();
    for coeffs in [&mut flame.beta, &mut flame.psi, &mut appearance.alpha] {
        for c in coeffs.iter_mut().take(SAMPLED_COMPONENTS) {
            *c = rng.sample(StandardNormal);
        }
    }
    flame.theta[1] = rng.random_range(HEAD_YAW_RANGE.0..=HEAD_YAW_RANGE.1);
    flame.theta[3] = rng.random_range(JAW_OPEN_RANGE.0..=JAW_OPEN_RANGE.1);
    let bank = lighting_bank();
    let lighting = bank[rng.random_range(0..bank.len())];
    let eyes = eye_positions(assets, &flame)?;
    let cam = camera_from_eye_points(eyes, framing.interocular_px, framing.center_px)?;
    Ok(FaceParams {
        flame,
        appearance,
        lighting,
        cam,
        style_id,
    })
}

/// Convex combination `λ·p_i + (1 − λ)·p_j` of shape, pose and expression;
/// everything else (appearance, lighting, camera, style) comes from `p_i`.
pub fn interpolate_pair(pi: &FaceParams, pj: &FaceParams, lambda: f64) -> FaceParams {
    let mix = |a: f64, b: f64| lambda * a + (1.0 - lambda) * b;
    let mut out = pi.clone();
    for (o, (a, b)) in out.flame.beta.iter_mut().zip(pi.flame.beta.iter().zip(&pj.flame.beta)) {
        *o = mix(*a, *b);
    }
    for (o, (a, b)) in out.flame.psi.iter_mut().zip(pi.flame.psi.iter().zip(&pj.flame.psi)) {
        *o = mix(*a, *b);
    }
    for k in 0..POSE_DIM {
        out.flame.theta[k] = mix(pi.flame.theta[k], pj.flame.theta[k]);
    }
    out
}

/// For every batch member `i`, pairs it with a different random member `j`
/// and a random `λ ~ U[0, 1)`.
pub fn interpolate_params(batch: &[FaceParams], seed: u64) -> Result<Vec<FaceParams>> {
    if batch.len() < 2 {
        return Err(Error::BatchTooSmall(batch.len()));
    }
    let mut rng = substream(seed, STREAM_INTERPOLATE);
    Ok(batch
        .iter()
        .enumerate()
        .map(|(i, pi)| {
            let mut j = rng.random_range(0..batch.len() - 1);
            if j >= i {
                j += 1;
            }
            let lambda: f64 = rng.random();
            interpolate_pair(pi, &batch[j], lambda)
        })
        .collect())
}
