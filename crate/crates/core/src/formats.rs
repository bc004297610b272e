//! On-disk tensors: one JSON header line terminated by `\n`, then raw
//! little-endian payload arrays in C order. See `docs/formats.md`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgbuf::Image;
use crate::raster::{ConditioningStack, StackLevel, CHANNEL_NAMES, STACK_CHANNELS};
use crate::scalar::Real;
use crate::texsteal::{CorrespondenceMap, PartialTexture};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackHeader {
    pub format: String,
    pub version: u32,
    pub resolution: usize,
    pub levels: usize,
    pub level_resolutions: Vec<usize>,
    pub channel_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextureHeader {
    pub format: String,
    pub version: u32,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceHeader {
    pub format: String,
    pub version: u32,
    pub tex_res: usize,
    pub image_res: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageHeader {
    pub format: String,
    pub version: u32,
    pub resolution: usize,
    pub channels: usize,
}

fn header_line<H: Serialize>(h: &H) -> Vec<u8> {
    let mut out = serde_json::to_vec(h).expect("headers serialize");
    out.push(b'\n');
    out
}

fn push_f32s<T: Real>(out: &mut Vec<u8>, xs: impl IntoIterator<Item = T>) {
    for x in xs {
        out.extend_from_slice(&x.to_f32_lossy().to_le_bytes());
    }
}

fn push_mask(out: &mut Vec<u8>, mask: &[bool]) {
    out.extend(mask.iter().map(|&m| m as u8));
}

fn split_header<'a, H: for<'de> Deserialize<'de>>(bytes: &'a [u8], format: &str) -> Result<(H, Payload<'a>)> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format(format!("{format}: missing header line")))?;
    let value: serde_json::Value = serde_json::from_slice(&bytes[..nl])?;
    let found = value.get("format").and_then(|f| f.as_str()).unwrap_or("");
    if found != format {
        return Err(Error::Format(format!("expected a {format} file, header says {found:?}")));
    }
    if value.get("version").and_then(|v| v.as_u64()) != Some(FORMAT_VERSION as u64) {
        return Err(Error::Format(format!("{format}: unsupported version")));
    }
    let header = serde_json::from_value(value)?;
    Ok((
        header,
        Payload {
            format: format.to_string(),
            buf: &bytes[nl + 1..],
        },
    ))
}

struct Payload<'a> {
    format: String,
    buf: &'a [u8],
}

impl<'a> Payload<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Format(format!(
                "{}: payload truncated (need {n} more bytes, have {})",
                self.format,
                self.buf.len()
            )));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn f32s<T: Real>(&mut self, n: usize) -> Result<Vec<T>> {
        let raw = self.take(n * 4)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| T::of_f32(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect())
    }

    fn mask(&mut self, n: usize) -> Result<Vec<bool>> {
        let raw = self.take(n)?;
        raw.iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(Error::Format(format!("{}: mask byte {b} is not 0 or 1", self.format))),
            })
            .collect()
    }

    fn finish(self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(Error::Format(format!("{}: {} trailing bytes", self.format, self.buf.len())))
        }
    }
}

pub fn stack_to_bytes<T: Real>(stack: &ConditioningStack<T>) -> Vec<u8> {
    let header = StackHeader {
        format: "cstk".into(),
        version: FORMAT_VERSION,
        resolution: stack.resolution(),
        levels: stack.levels.len(),
        level_resolutions: stack.levels.iter().map(|l| l.res).collect(),
        channel_names: CHANNEL_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    let mut out = header_line(&header);
    for level in &stack.levels {
        push_f32s(&mut out, level.data.iter().copied());
    }
    out
}

pub fn stack_from_bytes<T: Real>(bytes: &[u8]) -> Result<ConditioningStack<T>> {
    let (h, mut p): (StackHeader, _) = split_header(bytes, "cstk")?;
    if h.channel_names != CHANNEL_NAMES {
        return Err(Error::Format(format!("cstk: unexpected channel names {:?}", h.channel_names)));
    }
    let expected: Vec<usize> = (0..h.levels).map(|k| h.resolution >> k).collect();
    if h.level_resolutions != expected || h.levels == 0 {
        return Err(Error::Format(format!(
            "cstk: level resolutions {:?} do not halve from {}",
            h.level_resolutions, h.resolution
        )));
    }
    let mut levels = Vec::with_capacity(h.levels);
    for res in expected {
        levels.push(StackLevel {
            res,
            data: p.f32s(res * res * STACK_CHANNELS)?,
        });
    }
    p.finish()?;
    Ok(ConditioningStack { levels })
}

pub fn texture_to_bytes<T: Real>(tex: &PartialTexture<T>) -> Vec<u8> {
    let mut out = header_line(&TextureHeader {
        format: "ptex".into(),
        version: FORMAT_VERSION,
        resolution: tex.res,
    });
    push_f32s(&mut out, tex.texels.iter().flatten().copied());
    push_mask(&mut out, &tex.visible);
    out
}

pub fn texture_from_bytes<T: Real>(bytes: &[u8]) -> Result<PartialTexture<T>> {
    let (h, mut p): (TextureHeader, _) = split_header(bytes, "ptex")?;
    let n = h.resolution * h.resolution;
    let flat: Vec<T> = p.f32s(n * 3)?;
    let visible = p.mask(n)?;
    p.finish()?;
    Ok(PartialTexture {
        res: h.resolution,
        texels: flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        visible,
    })
}

pub fn correspondences_to_bytes<T: Real>(corr: &CorrespondenceMap<T>) -> Vec<u8> {
    let mut out = header_line(&CorrespondenceHeader {
        format: "corr".into(),
        version: FORMAT_VERSION,
        tex_res: corr.tex_res,
        image_res: corr.image_res,
    });
    push_f32s(&mut out, corr.img_xy.iter().flatten().copied());
    push_mask(&mut out, &corr.visible);
    push_mask(&mut out, &corr.pixel_mask);
    out
}

pub fn correspondences_from_bytes<T: Real>(bytes: &[u8]) -> Result<CorrespondenceMap<T>> {
    let (h, mut p): (CorrespondenceHeader, _) = split_header(bytes, "corr")?;
    let n = h.tex_res * h.tex_res;
    let flat: Vec<T> = p.f32s(n * 2)?;
    let visible = p.mask(n)?;
    let pixel_mask = p.mask(h.image_res * h.image_res)?;
    p.finish()?;
    Ok(CorrespondenceMap {
        tex_res: h.tex_res,
        image_res: h.image_res,
        img_xy: flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
        visible,
        pixel_mask,
    })
}

pub fn image_to_bytes<T: Real>(img: &Image<T>) -> Vec<u8> {
    let mut out = header_line(&ImageHeader {
        format: "timg".into(),
        version: FORMAT_VERSION,
        resolution: img.resolution,
        channels: 3,
    });
    push_f32s(&mut out, img.pixels.iter().flatten().copied());
    out
}

pub fn image_from_bytes<T: Real>(bytes: &[u8]) -> Result<Image<T>> {
    let (h, mut p): (ImageHeader, _) = split_header(bytes, "timg")?;
    if h.channels != 3 {
        return Err(Error::Format(format!("timg: {} channels, expected 3", h.channels)));
    }
    let flat: Vec<T> = p.f32s(h.resolution * h.resolution * 3)?;
    p.finish()?;
    Image::from_pixels(h.resolution, flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
}

pub fn write_file(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    std::fs::read(path).map_err(|e| Error::io(path, e))
}
