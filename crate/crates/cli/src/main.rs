use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use facecond::camera::EyeFraming;
use facecond::formats;
use facecond::model::format as asset_format;
use facecond::pipeline::{self, DatasetOptions, ParamsFile};
use facecond::raster::{render, ConditioningStack, StackLevel};
use facecond::{
    albedo_from_appearance, conditioning_stack, consistency_loss, evaluate, gen_synthetic_assets, steal_texture,
    texel_correspondences, Error, HeadModelAssets, Image, ImageSpec, RasterOptions,
};

const FORMATS_HELP: &str = "\
File formats (all little-endian):
  .fcnd   head model assets: b\"FCND\", u32 version, then per array u32 rank,
          u32 dims, payload (faces and eye ids u32, everything else f32)
  .json   face parameters: resolution, style_id, beta[100], theta[6],
          psi[50], alpha[50], lighting[27] (index 3*k + channel),
          camera {scale, tx, ty}
  .cstk   conditioning stack: JSON header line, then f32 levels in
          (level, row, col, channel) order; channels normal_xyz, texture_rgb
  .ptex   partial texture: JSON header line, f32 rgb texels, u8 visibility
  .corr   texel correspondences: JSON header line, f32 image xy per texel,
          u8 texel visibility, u8 pixel coverage
  .timg   f32 rgb image: JSON header line, row-major pixels
Exit status: 0 success, 1 invalid input, 2 I/O failure.";

#[derive(Parser)]
#[command(name = "facecond", version, about = "Face-image conditioning engine", after_long_help = FORMATS_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a procedural head model and write it as .fcnd.
    GenAssets {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5023)]
        vertices: usize,
        #[arg(long, default_value_t = 128)]
        tex_res: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample face parameters and write them as JSON.
    SampleParams {
        #[command(flatten)]
        assets: AssetSource,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        res: usize,
        #[command(flatten)]
        framing: FramingArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the conditioning stack for a parameter file.
    Render {
        #[arg(long)]
        params: PathBuf,
        #[command(flatten)]
        assets: AssetSource,
        #[arg(long)]
        out: PathBuf,
        /// Side-by-side normal and texture preview.
        #[arg(long)]
        png: Option<PathBuf>,
        /// Textured rendering alone, as .timg or .png.
        #[arg(long)]
        color: Option<PathBuf>,
        /// Pyramid depth; defaults to every level down to 4 px.
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Steal a partial texture from an image aligned with a parameter file.
    Steal {
        #[arg(long)]
        params: PathBuf,
        #[command(flatten)]
        assets: AssetSource,
        /// Source image, .png or .timg, at the parameter file's resolution.
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = facecond::texsteal::DEFAULT_TEXTURE_RES)]
        tex_res: usize,
        /// Also write the texel correspondences.
        #[arg(long)]
        corr: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Texture-consistency loss between two partial textures.
    Consistency {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Generate a synthetic training dataset.
    Dataset {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        res: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        assets: AssetSource,
        /// Correspondence map side; 0 skips them.
        #[arg(long, default_value_t = facecond::texsteal::DEFAULT_TEXTURE_RES)]
        corr_res: usize,
        #[command(flatten)]
        framing: FramingArgs,
        /// Replace a non-empty output directory.
        #[arg(long)]
        force: bool,
    },
    /// Write a PNG preview of one level of a conditioning stack.
    Preview {
        #[arg(long)]
        stack: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
}

#[derive(Args)]
struct AssetSource {
    /// Head model; generated procedurally when omitted.
    #[arg(long)]
    assets: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    asset_seed: u64,
}

#[derive(Args)]
struct FramingArgs {
    /// Target eye distance in pixels [default: 0.22 x resolution].
    #[arg(long)]
    interocular_px: Option<f64>,
    /// Target eye midpoint x in pixels [default: 0.5 x resolution].
    #[arg(long)]
    eye_center_x: Option<f64>,
    /// Target eye midpoint y in pixels [default: 0.42 x resolution].
    #[arg(long)]
    eye_center_y: Option<f64>,
}

impl FramingArgs {
    fn resolve(&self, image: ImageSpec) -> Option<EyeFraming> {
        if self.interocular_px.is_none() && self.eye_center_x.is_none() && self.eye_center_y.is_none() {
            return None;
        }
        let d = EyeFraming::default_for(image);
        Some(EyeFraming {
            interocular_px: self.interocular_px.unwrap_or(d.interocular_px),
            center_px: (
                self.eye_center_x.unwrap_or(d.center_px.0),
                self.eye_center_y.unwrap_or(d.center_px.1),
            ),
        })
    }
}

enum Failure {
    Invalid(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

impl From<image::ImageError> for Failure {
    fn from(e: image::ImageError) -> Self {
        match e {
            image::ImageError::IoError(_) => Failure::Io(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn raster_options(workers: Option<usize>) -> CliResult<RasterOptions> {
    let mut opts = RasterOptions::default();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Failure::Invalid("--workers must be positive".into()));
        }
        opts.workers = w;
    }
    Ok(opts)
}

fn load_assets(src: &AssetSource) -> CliResult<HeadModelAssets<f64>> {
    Ok(match &src.assets {
        Some(path) => asset_format::load_assets(path)?,
        None => gen_synthetic_assets(src.asset_seed, 5023, 128)?,
    })
}

fn read_params(path: &Path) -> CliResult<(pipeline::FaceParams, ImageSpec)> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(ParamsFile::from_json(&text)?)
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn write_png(path: &Path, width: usize, height: usize, rgb: Vec<u8>) -> CliResult {
    let buf = image::RgbImage::from_raw(width as u32, height as u32, rgb).expect("buffer sized to image");
    buf.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

fn preview_level(level: &StackLevel<f64>) -> Vec<u8> {
    let r = level.res;
    let mut rgb = Vec::with_capacity(2 * r * r * 3);
    for row in 0..r {
        for half in [0, 3] {
            for col in 0..r {
                rgb.extend((0..3).map(|ch| to_u8(level.get(row, col, half + ch))));
            }
        }
    }
    rgb
}

fn write_image(path: &Path, img: &Image<f64>) -> CliResult {
    if path.extension().is_some_and(|e| e == "timg") {
        return Ok(formats::write_file(path, &formats::image_to_bytes(img))?);
    }
    let rgb = img.pixels.iter().flat_map(|p| p.map(to_u8)).collect();
    write_png(path, img.resolution, img.resolution, rgb)
}

fn read_image(path: &Path) -> CliResult<Image<f64>> {
    if path.extension().is_some_and(|e| e == "timg") {
        return Ok(formats::image_from_bytes(&formats::read_file(path)?)?);
    }
    let img = image::open(path)?.to_rgb8();
    if img.width() != img.height() {
        return Err(Failure::Invalid(format!("{}: image must be square", path.display())));
    }
    let pixels = img
        .pixels()
        .map(|p| p.0.map(|c| f64::from(c) / 255.0))
        .collect();
    Ok(Image::from_pixels(img.width() as usize, pixels)?)
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::GenAssets {
            seed,
            vertices,
            tex_res,
            out,
        } => {
            let assets = gen_synthetic_assets::<f64>(seed, vertices, tex_res)?;
            asset_format::save(&assets, &out)?;
            println!("wrote {} ({} vertices, {} faces)", out.display(), assets.template.len(), assets.faces.len());
        }
        Command::SampleParams {
            assets,
            seed,
            res,
            framing,
            out,
        } => {
            let assets = load_assets(&assets)?;
            let image = ImageSpec::new(res)?;
            let framing = framing.resolve(image).unwrap_or_else(|| EyeFraming::default_for(image));
            let params = pipeline::sample_params_framed(seed, &assets, framing)?;
            formats::write_file(&out, ParamsFile::new(&params, image).to_json().as_bytes())?;
        }
        Command::Render {
            params,
            assets,
            out,
            png,
            color,
            levels,
            workers,
        } => {
            let (params, image) = read_params(&params)?;
            let assets = load_assets(&assets)?;
            let mesh = evaluate(&assets, &params.flame)?;
            let albedo = albedo_from_appearance(&assets, &params.appearance)?;
            let rendering = render(&mesh, &params.cam, image, &albedo, &params.lighting, raster_options(workers)?)?;
            let levels = levels.unwrap_or_else(|| ConditioningStack::<f64>::max_levels(image.resolution));
            let stack = conditioning_stack(&rendering.normal_img, &rendering.color_img, levels)?;
            formats::write_file(&out, &formats::stack_to_bytes(&stack))?;
            if let Some(png) = png {
                let r = stack.resolution();
                write_png(&png, 2 * r, r, preview_level(stack.channels()))?;
            }
            if let Some(color) = color {
                write_image(&color, &rendering.color_img)?;
            }
        }
        Command::Steal {
            params,
            assets,
            image,
            out,
            tex_res,
            corr,
            workers,
        } => {
            let (params, spec) = read_params(&params)?;
            let assets = load_assets(&assets)?;
            let img = read_image(&image)?;
            if img.resolution != spec.resolution {
                return Err(Failure::Invalid(format!(
                    "image is {}px but the parameters describe {}px",
                    img.resolution, spec.resolution
                )));
            }
            let mesh = evaluate(&assets, &params.flame)?;
            let map = texel_correspondences(&mesh, &params.cam, spec, tex_res, raster_options(workers)?)?;
            let tex = steal_texture(&img, &map)?;
            formats::write_file(&out, &formats::texture_to_bytes(&tex))?;
            if let Some(corr) = corr {
                formats::write_file(&corr, &formats::correspondences_to_bytes(&map))?;
            }
            println!("visible texels {} of {}", map.visible_count(), tex_res * tex_res);
        }
        Command::Consistency { a, b } => {
            let a = formats::texture_from_bytes::<f64>(&formats::read_file(&a)?)?;
            let b = formats::texture_from_bytes::<f64>(&formats::read_file(&b)?)?;
            let (loss, overlap) = consistency_loss(&a, &b)?;
            println!("loss {loss:.9e}");
            println!("overlap {overlap}");
        }
        Command::Dataset {
            n,
            res,
            seed,
            out,
            assets,
            corr_res,
            framing,
            force,
        } => {
            let assets = load_assets(&assets)?;
            let image = ImageSpec::new(res)?;
            let opts = DatasetOptions {
                force,
                correspondence_res: (corr_res > 0).then_some(corr_res),
                framing: framing.resolve(image),
            };
            let manifest = pipeline::make_dataset(&assets, n, &out, seed, image, opts)?;
            println!("wrote {} records to {}", manifest.records.len(), out.display());
        }
        Command::Preview { stack, out, level } => {
            let stack = formats::stack_from_bytes::<f64>(&formats::read_file(&stack)?)?;
            let Some(l) = stack.levels.get(level) else {
                return Err(Failure::Invalid(format!(
                    "level {level} out of range, stack has {}",
                    stack.levels.len()
                )));
            };
            write_png(&out, 2 * l.res, l.res, preview_level(l))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Invalid(msg) | Failure::Io(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
