//! Deterministic engine for face-image conditioning: a parametric head model,
//! weak-perspective camera, SH shading, a software rasterizer producing
//! pixel-aligned normal and texture renderings, texture stealing with the
//! texture-consistency loss, and a synthetic dataset pipeline.
//!
//! Geometry, shading, rasterization and stealing are generic over [`Real`]
//! (`f32` or `f64`); the aliases below fix the working precision. File
//! formats store `f32`.
//!
//! ```
//! use facecond::raster::{render, ConditioningStack};
//! use facecond::{albedo_from_appearance, conditioning_stack, evaluate, gen_synthetic_assets, sample_params};
//! use facecond::{ImageSpec, RasterOptions};
//!
//! # fn main() -> facecond::Result<()> {
//! let assets = gen_synthetic_assets::<f64>(0, 800, 32)?;
//! let image = ImageSpec::new(64)?;
//! let p = sample_params(7, &assets, image)?;
//! let mesh = evaluate(&assets, &p.flame)?;
//! let albedo = albedo_from_appearance(&assets, &p.appearance)?;
//! let r = render(&mesh, &p.cam, image, &albedo, &p.lighting, RasterOptions::default())?;
//! let stack = conditioning_stack(&r.normal_img, &r.color_img, ConditioningStack::<f64>::max_levels(64))?;
//! assert_eq!(stack.resolution(), 64);
//! # Ok(())
//! # }
//! ```

pub mod camera;
pub mod error;
pub mod formats;
pub mod imgbuf;
pub mod math;
pub mod model;
pub mod pipeline;
pub mod primitives;
pub mod raster;
pub mod rng;
pub mod scalar;
pub mod shading;
pub mod texsteal;

pub use camera::{camera_from_eyes, project, CameraParams, EyeFraming, ImageSpec};
pub use error::{Error, Result};
pub use imgbuf::Image;
pub use math::{Mat3, Vec3};
pub use model::format::load_assets;
pub use model::synthetic::gen_synthetic_assets;
pub use model::{evaluate, vertex_normals, FlameParams, HeadModelAssets, Mesh};
pub use pipeline::{interpolate_params, make_dataset, sample_params, FaceParams};
pub use raster::{
    conditioning_stack, rasterize, rasterize_with, render_normals, render_textured, ConditioningStack, RasterOptions,
    RenderBuffers,
};
pub use scalar::Real;
pub use shading::{albedo_from_appearance, sh_basis, shade, AppearanceParams, LightingParams, TextureMap};
pub use texsteal::{consistency_loss, steal_texture, texel_correspondences, CorrespondenceMap, PartialTexture};

pub type HeadModelAssetsF64 = HeadModelAssets<f64>;
pub type HeadModelAssetsF32 = HeadModelAssets<f32>;
pub type MeshF64 = Mesh<f64>;
pub type MeshF32 = Mesh<f32>;
pub type FlameParamsF64 = FlameParams<f64>;
pub type CameraF64 = CameraParams<f64>;
pub type RenderBuffersF64 = RenderBuffers<f64>;
pub type RenderBuffersF32 = RenderBuffers<f32>;
pub type ConditioningStackF64 = ConditioningStack<f64>;
pub type ConditioningStackF32 = ConditioningStack<f32>;
pub type PartialTextureF64 = PartialTexture<f64>;
pub type CorrespondenceMapF64 = CorrespondenceMap<f64>;
pub type ImageF64 = Image<f64>;
pub type ImageF32 = Image<f32>;
