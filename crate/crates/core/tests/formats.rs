use facecond::formats::{self, CorrespondenceHeader, StackHeader};
use facecond::primitives::{icosphere, per_face_atlas};
use facecond::{
    conditioning_stack, steal_texture, texel_correspondences, CameraParams, Error, Image, ImageSpec, RasterOptions,
};

fn header_json(bytes: &[u8]) -> serde_json::Value {
    let end = bytes.iter().position(|&b| b == b'\n').unwrap();
    serde_json::from_slice(&bytes[..end]).unwrap()
}

fn fixtures() -> (facecond::CorrespondenceMap<f64>, Image<f64>) {
    let mesh = icosphere(2, 1.0);
    let atlas = per_face_atlas(mesh.faces.len());
    let mesh = mesh.with_uv(atlas).unwrap();
    let cam = CameraParams::new(24.0, 31.0, 33.0).unwrap();
    let corr = texel_correspondences(&mesh, &cam, ImageSpec::new(64).unwrap(), 32, RasterOptions::default()).unwrap();
    let img = Image::from_pixels(
        64,
        (0..64 * 64)
            .map(|i| [(i % 64) as f64 / 64.0, (i / 64) as f64 / 64.0, 0.25])
            .collect(),
    )
    .unwrap();
    (corr, img)
}

#[test]
fn files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let (corr, img) = fixtures();
    let tex = steal_texture(&img, &corr).unwrap();
    let stack = conditioning_stack(&img, &img, 4).unwrap();

    let p = dir.path().join("nested/out.corr");
    formats::write_file(&p, &formats::correspondences_to_bytes(&corr)).unwrap();
    let back = formats::correspondences_from_bytes::<f64>(&formats::read_file(&p).unwrap()).unwrap();
    assert_eq!(back.visible, corr.visible);
    assert_eq!(back.pixel_mask, corr.pixel_mask);
    for (a, b) in back.img_xy.iter().zip(&corr.img_xy) {
        assert_eq!(a[0], b[0] as f32 as f64);
        assert_eq!(a[1], b[1] as f32 as f64);
    }

    let p = dir.path().join("t.ptex");
    formats::write_file(&p, &formats::texture_to_bytes(&tex)).unwrap();
    let back = formats::texture_from_bytes::<f32>(&formats::read_file(&p).unwrap()).unwrap();
    assert_eq!(back.visible, tex.visible);
    assert_eq!(back.res, 32);

    let p = dir.path().join("s.cstk");
    formats::write_file(&p, &formats::stack_to_bytes(&stack)).unwrap();
    let back = formats::stack_from_bytes::<f32>(&formats::read_file(&p).unwrap()).unwrap();
    assert_eq!(back.levels.len(), 4);
    assert_eq!(back.levels[3].res, 8);

    let p = dir.path().join("i.timg");
    formats::write_file(&p, &formats::image_to_bytes(&img)).unwrap();
    let back = formats::image_from_bytes::<f64>(&formats::read_file(&p).unwrap()).unwrap();
    assert_eq!(back, img);

    assert!(matches!(formats::read_file(dir.path().join("absent")), Err(Error::Io { .. })));
}

#[test]
fn headers_carry_the_documented_fields() {
    let (corr, img) = fixtures();
    let stack = conditioning_stack(&img, &img, 3).unwrap();
    let bytes = formats::stack_to_bytes(&stack);
    let h = header_json(&bytes);
    assert_eq!(h["format"], "cstk");
    assert_eq!(h["resolution"], 64);
    assert_eq!(h["levels"], 3);
    assert_eq!(h["level_resolutions"], serde_json::json!([64, 32, 16]));
    assert_eq!(
        h["channel_names"],
        serde_json::json!(["normal_x", "normal_y", "normal_z", "texture_r", "texture_g", "texture_b"])
    );
    let typed: StackHeader = serde_json::from_value(h).unwrap();
    let payload = bytes.len() - (bytes.iter().position(|&b| b == b'\n').unwrap() + 1);
    assert_eq!(payload, 4 * 6 * (64 * 64 + 32 * 32 + 16 * 16));
    assert_eq!(typed.version, formats::FORMAT_VERSION);

    let bytes = formats::correspondences_to_bytes(&corr);
    let h: CorrespondenceHeader = serde_json::from_value(header_json(&bytes)).unwrap();
    assert_eq!((h.format.as_str(), h.tex_res, h.image_res), ("corr", 32, 64));
    let payload = bytes.len() - (bytes.iter().position(|&b| b == b'\n').unwrap() + 1);
    assert_eq!(payload, 32 * 32 * 8 + 32 * 32 + 64 * 64);

    // Stack payload layout: level, row, col, channel.
    let stack_bytes = formats::stack_to_bytes(&stack);
    let start = stack_bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
    let at = |row: usize, col: usize, ch: usize| {
        let o = start + 4 * ((row * 64 + col) * 6 + ch);
        f32::from_le_bytes(stack_bytes[o..o + 4].try_into().unwrap())
    };
    assert_eq!(at(5, 9, 0), img.get(5, 9)[0] as f32);
    assert_eq!(at(5, 9, 4), img.get(5, 9)[1] as f32);
}

#[test]
fn wrong_kind_and_truncation_are_errors() {
    let (corr, img) = fixtures();
    let tex_bytes = formats::texture_to_bytes(&steal_texture(&img, &corr).unwrap());
    assert!(formats::stack_from_bytes::<f64>(&tex_bytes).is_err());
    assert!(formats::correspondences_from_bytes::<f64>(&tex_bytes).is_err());
    for cut in [0, 5, tex_bytes.len() / 2, tex_bytes.len() - 1] {
        assert!(formats::texture_from_bytes::<f64>(&tex_bytes[..cut]).is_err());
    }
    let mut extra = tex_bytes.clone();
    extra.push(0);
    assert!(formats::texture_from_bytes::<f64>(&extra).is_err());
}
