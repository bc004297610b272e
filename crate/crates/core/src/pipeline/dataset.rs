//! Synthetic training-set factory.
//!
//! Each record pairs sampled parameters with their conditioning stack, a
//! correspondence map for texture stealing, and a synthetic target "photo":
//! the textured rendering composited over a background, hair band and
//! shoulders that depend only on the record's style id. Those nuisance factors
//! are exactly what the conditioning cannot explain.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{sample_params_with, ParamsFile};
use crate::camera::{EyeFraming, ImageSpec};
use crate::error::{Error, Result};
use crate::formats;
use crate::imgbuf::Image;
use crate::model::{evaluate, format as asset_format, HeadModelAssets};
use crate::raster::{conditioning_stack, render, ConditioningStack, RasterOptions, Rendering};
use crate::rng::substream;
use crate::shading::albedo_from_appearance;
use crate::texsteal::{texel_correspondences, DEFAULT_TEXTURE_RES};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const MANIFEST_VERSION: u32 = 1;

const RECORD_STREAM_BASE: u64 = 1 << 32;
const STYLE_STREAM_BASE: u64 = 1 << 48;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetOptions {
    /// Replace a non-empty output directory.
    pub force: bool,
    /// Side of the correspondence maps; `None` skips them.
    pub correspondence_res: Option<usize>,
    pub framing: Option<EyeFraming>,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            force: false,
            correspondence_res: Some(DEFAULT_TEXTURE_RES),
            framing: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub kind: String,
    pub format_version: u32,
    pub seed: u64,
    pub asset_hash: String,
    pub resolution: usize,
    pub records: usize,
    pub correspondence_res: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub kind: String,
    pub record_id: u64,
    pub style_id: u64,
    pub params: String,
    pub conditioning: String,
    pub target: String,
    pub correspondence: Option<String>,
    /// Hex SHA-256 per file, keyed like the path fields.
    pub sha256: std::collections::BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub header: ManifestHeader,
    pub records: Vec<RecordEntry>,
}

impl DatasetManifest {
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("manifest header serializes");
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("manifest record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header: ManifestHeader =
            serde_json::from_str(lines.next().ok_or_else(|| Error::Format("empty manifest".into()))?)?;
        if header.kind != "header" || header.format_version != MANIFEST_VERSION {
            return Err(Error::Format("manifest header missing or of another version".into()));
        }
        let records = lines
            .map(|l| serde_json::from_str::<RecordEntry>(l).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { header, records })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Composites the textured rendering over style-keyed nuisance content.
/// Inside the rendering's mask the result equals `rendering.color_img`.
pub fn synthetic_target(rendering: &Rendering<f64>, seed: u64, style_id: u64) -> Image<f64> {
    let mut rng = substream(seed, STYLE_STREAM_BASE + style_id);
    let mut color = || [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)];
    let (bg_a, bg_b, shirt) = (color(), color(), color());
    let hair_tone: f64 = rng.random_range(0.05..0.6);
    let hair = [hair_tone, hair_tone * rng.random_range(0.6..0.9), hair_tone * rng.random_range(0.4..0.8)];
    let freq: f64 = rng.random_range(1.0..4.0);
    let phase: f64 = rng.random_range(0.0..2.0 * PI);
    let angle: f64 = rng.random_range(0.0..PI);
    let hair_thickness: f64 = rng.random_range(0.08..0.3);
    let hair_drop: f64 = rng.random_range(-0.1..0.35);
    let shoulder_width: f64 = rng.random_range(0.35..0.5);

    let res = rendering.buffers.resolution;
    let p = res as f64;
    let mask = &rendering.buffers.mask;
    let (mut r0, mut r1, mut c0, mut c1) = (res, 0, res, 0);
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        let (r, c) = (i / res, i % res);
        r0 = r0.min(r);
        r1 = r1.max(r);
        c0 = c0.min(c);
        c1 = c1.max(c);
    }
    let (cx, cy, hw, hh) = if r0 <= r1 {
        (
            (c0 + c1 + 1) as f64 / 2.0,
            (r0 + r1 + 1) as f64 / 2.0,
            (c1 + 1 - c0) as f64 / 2.0,
            (r1 + 1 - r0) as f64 / 2.0,
        )
    } else {
        (p / 2.0, p / 2.0, p / 4.0, p / 4.0)
    };

    let mut out = Image::filled(res, [0.0; 3]);
    for row in 0..res {
        for col in 0..res {
            let i = row * res + col;
            if mask[i] {
                out.pixels[i] = rendering.color_img.pixels[i];
                continue;
            }
            let (x, y) = ((col as f64 + 0.5) / p, (row as f64 + 0.5) / p);
            let s = 0.5 + 0.5 * (2.0 * PI * freq * (x * angle.cos() + y * angle.sin()) + phase).sin();
            let light = 0.85 + 0.15 * (1.0 - y);
            let mut rgb = [0.0; 3];
            for ch in 0..3 {
                rgb[ch] = (bg_a[ch] * s + bg_b[ch] * (1.0 - s)) * light;
            }
            let (px, py) = (col as f64 + 0.5, row as f64 + 0.5);
            let sx = (px - cx) / (shoulder_width * p);
            let sy = (py - (cy + hh + 0.3 * p)) / (0.3 * p);
            if sx * sx + sy * sy <= 1.0 {
                rgb = shirt.map(|c| c * (0.9 + 0.1 * sy.abs()));
            }
            let hx = (px - cx) / (hw * (1.0 + hair_thickness));
            let hy = (py - cy) / (hh * (1.0 + hair_thickness));
            if hx * hx + hy * hy <= 1.0 && py < cy + hair_drop * hh {
                rgb = hair.map(|c| c * (0.9 + 0.1 * hx.abs()));
            }
            out.pixels[i] = rgb.map(|c: f64| c.clamp(0.0, 1.0));
        }
    }
    out
}

fn write_record(
    dir: &Path,
    assets: &HeadModelAssets<f64>,
    seed: u64,
    record_id: u64,
    image: ImageSpec,
    opts: &DatasetOptions,
) -> Result<RecordEntry> {
    let framing = opts.framing.unwrap_or_else(|| EyeFraming::default_for(image));
    let mut rng = substream(seed, RECORD_STREAM_BASE + record_id);
    let params = sample_params_with(&mut rng, assets, framing, record_id)?;
    let mesh = evaluate(assets, &params.flame)?;
    let albedo = albedo_from_appearance(assets, &params.appearance)?;
    let serial = RasterOptions { workers: 1, tile: 16 };
    let rendering = render(&mesh, &params.cam, image, &albedo, &params.lighting, serial)?;
    let levels = ConditioningStack::<f64>::max_levels(image.resolution);
    let stack = conditioning_stack(&rendering.normal_img, &rendering.color_img, levels)?;
    let target = synthetic_target(&rendering, seed, params.style_id);

    let stem = format!("{record_id:06}");
    let mut files: Vec<(&str, String, Vec<u8>)> = vec![
        ("params", format!("records/{stem}.params.json"), ParamsFile::new(&params, image).to_json().into_bytes()),
        ("conditioning", format!("records/{stem}.cstk"), formats::stack_to_bytes(&stack)),
        ("target", format!("records/{stem}.target.timg"), formats::image_to_bytes(&target)),
    ];
    if let Some(t) = opts.correspondence_res {
        let corr = texel_correspondences(&mesh, &params.cam, image, t, serial)?;
        files.push(("correspondence", format!("records/{stem}.corr"), formats::correspondences_to_bytes(&corr)));
    }
    let mut sha256 = std::collections::BTreeMap::new();
    for (key, rel, bytes) in &files {
        formats::write_file(dir.join(rel), bytes)?;
        sha256.insert(key.to_string(), sha256_hex(bytes));
    }
    let path_of = |key: &str| files.iter().find(|f| f.0 == key).map(|f| f.1.clone());
    Ok(RecordEntry {
        kind: "record".into(),
        record_id,
        style_id: params.style_id,
        params: path_of("params").expect("params written"),
        conditioning: path_of("conditioning").expect("stack written"),
        target: path_of("target").expect("target written"),
        correspondence: path_of("correspondence"),
        sha256,
    })
}

fn prepare_dir(out_dir: &Path, force: bool) -> Result<()> {
    if out_dir.exists() {
        let non_empty = std::fs::read_dir(out_dir)
            .map_err(|e| Error::io(out_dir, e))?
            .next()
            .is_some();
        if non_empty {
            if !force {
                return Err(Error::OutputExists(out_dir.to_path_buf()));
            }
            std::fs::remove_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        }
    }
    let records = out_dir.join("records");
    std::fs::create_dir_all(&records).map_err(|e| Error::io(records, e))
}

/// Generates `n` records under `out_dir` and writes `manifest.jsonl`. Output
/// bytes depend only on `(assets, n, seed, image, opts)`.
pub fn make_dataset(
    assets: &HeadModelAssets<f64>,
    n: usize,
    out_dir: impl AsRef<Path>,
    seed: u64,
    image: ImageSpec,
    opts: DatasetOptions,
) -> Result<DatasetManifest> {
    let out_dir = out_dir.as_ref();
    prepare_dir(out_dir, opts.force)?;
    let records = (0..n as u64)
        .into_par_iter()
        .map(|id| write_record(out_dir, assets, seed, id, image, &opts))
        .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest {
        header: ManifestHeader {
            kind: "header".into(),
            format_version: MANIFEST_VERSION,
            seed,
            asset_hash: sha256_hex(&asset_format::to_bytes(assets)),
            resolution: image.resolution,
            records: n,
            correspondence_res: opts.correspondence_res,
        },
        records,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let mut f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(manifest.to_jsonl().as_bytes()).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = dir.as_ref().join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    DatasetManifest::from_jsonl(&text)
}

/// Re-reads a dataset and checks counts, style-id uniqueness and file hashes.
pub fn validate_manifest(dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    let dir = dir.as_ref();
    let manifest = read_manifest(dir)?;
    if manifest.records.len() != manifest.header.records {
        return Err(Error::invalid(
            "manifest",
            format!("header promises {} records, found {}", manifest.header.records, manifest.records.len()),
        ));
    }
    let styles: HashSet<u64> = manifest.records.iter().map(|r| r.style_id).collect();
    if styles.len() != manifest.records.len() {
        return Err(Error::invalid("manifest", "style ids are not unique"));
    }
    for r in &manifest.records {
        let mut paths: Vec<(&str, &String)> = vec![
            ("params", &r.params),
            ("conditioning", &r.conditioning),
            ("target", &r.target),
        ];
        if let Some(c) = &r.correspondence {
            paths.push(("correspondence", c));
        }
        for (key, rel) in paths {
            let path: PathBuf = dir.join(rel);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let expected = r.sha256.get(key).map(String::as_str).unwrap_or("");
            if sha256_hex(&bytes) != expected {
                return Err(Error::invalid("manifest", format!("hash mismatch for {rel}")));
            }
        }
    }
    Ok(manifest)
}
