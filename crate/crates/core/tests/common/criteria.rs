//! Acceptance criteria, each returning a measured outcome instead of panicking
//! so a runner can report all of them.

use std::time::Instant;

use facecond::camera::EyeFraming;
use facecond::error::Error;
use facecond::math::Vec3;
use facecond::pipeline::{make_dataset, validate_manifest, DatasetOptions, HEAD_YAW_RANGE, JAW_OPEN_RANGE};
use facecond::primitives::{icosphere, per_face_atlas};
use facecond::raster::{pool_2x2, render, StackLevel, EMPTY};
use facecond::shading::{shade_unclamped, sh_basis};
use facecond::{
    camera_from_eyes, evaluate, formats, gen_synthetic_assets, rasterize, sample_params, shade, steal_texture,
    texel_correspondences, CameraParams, FlameParams, HeadModelAssets, ImageSpec, LightingParams, Mesh,
    RasterOptions, TextureMap,
};
use rand::Rng;
use rand_distr::StandardNormal;

use super::*;

pub struct Outcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, detail }
    }
}

pub fn head_assets() -> HeadModelAssets<f64> {
    gen_synthetic_assets(7, 1200, 128).unwrap()
}

pub fn rasterizer_oracle() -> Outcome {
    const RES: usize = 64;
    let start = Instant::now();
    let cam = pixel_camera();
    let mut mismatches = 0usize;
    let mut covered = 0usize;
    for seed in 0..100 {
        let mesh = random_screen_mesh(seed, RES, 200);
        let got = rasterize(&mesh, &cam, ImageSpec::new(RES).unwrap());
        let want = brute_force_raster(&mesh, &cam, RES);
        for i in 0..RES * RES {
            let id = (got.tri_id[i] != EMPTY).then_some(got.tri_id[i]);
            let depth_ok = match id {
                Some(_) => (got.depth[i] - want.depth[i]).abs() <= 1e-12 * want.depth[i].abs().max(1.0),
                None => got.depth[i].is_infinite() && want.depth[i].is_infinite(),
            };
            if id != want.tri_id[i] || got.mask[i] != id.is_some() || !depth_ok {
                mismatches += 1;
            }
        }
        covered += got.covered();
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        "rasterizer matches brute-force oracle on 100 random meshes",
        mismatches == 0 && secs < 60.0,
        format!("{mismatches} mismatching pixels, {covered} covered, {secs:.2}s"),
    )
}

/// Two icospheres, the smaller one partly in front of the larger, with a
/// per-face UV atlas.
pub fn occluding_spheres() -> Mesh<f64> {
    let big = icosphere(2, 1.0);
    let small = translated(&icosphere(2, 0.45), Vec3::new(0.55, 0.35, 1.1));
    let mesh = merge(&[big, small]);
    let atlas = per_face_atlas(mesh.faces.len());
    mesh.with_uv(atlas).unwrap()
}

pub fn visibility_oracle() -> Outcome {
    const RES: usize = 128;
    const TEX: usize = 128;
    let base = occluding_spheres();
    let mut r = rng(20);
    let mut worst = 0.0f64;
    let mut total_diff = 0usize;
    let mut total = 0usize;
    let mut visible = 0usize;
    for _ in 0..20 {
        let mesh = base.rotated(&random_rotation(&mut r));
        let cam = CameraParams::new(
            r.random_range(30.0..45.0),
            r.random_range(40.0..88.0),
            r.random_range(40.0..88.0),
        )
        .unwrap();
        let corr = texel_correspondences(&mesh, &cam, ImageSpec::new(RES).unwrap(), TEX, RasterOptions::default()).unwrap();
        let oracle = raycast_visibility(&mesh, &cam, RES, TEX);
        let diff = corr.visible.iter().zip(&oracle).filter(|(a, b)| a != b).count();
        let frac = diff as f64 / (TEX * TEX) as f64;
        worst = worst.max(frac);
        total_diff += diff;
        total += TEX * TEX;
        visible += oracle.iter().filter(|&&v| v).count();
    }
    Outcome::new(
        "texel visibility matches ray-cast oracle on 20 poses",
        worst < 0.005,
        format!(
            "worst pose {:.3}% of texels disagree, overall {:.3}% ({total_diff} of {total}), {visible} visible",
            100.0 * worst,
            100.0 * total_diff as f64 / total as f64
        ),
    )
}

fn steal_head(
    assets: &HeadModelAssets<f64>,
    albedo: &TextureMap<f64>,
    yaw: f64,
    res: usize,
    tex: usize,
) -> facecond::PartialTexture<f64> {
    let mut flame = FlameParams::zeros();
    flame.theta[1] = yaw;
    let mesh = evaluate(assets, &flame).unwrap();
    let image = ImageSpec::new(res).unwrap();
    let f = EyeFraming::default_for(image);
    let cam = camera_from_eyes(&mesh, assets, f.interocular_px, f.center_px).unwrap();
    let light = LightingParams::constant_unit();
    let opts = RasterOptions::default();
    let rendering = render(&mesh, &cam, image, albedo, &light, opts).unwrap();
    let corr = texel_correspondences(&mesh, &cam, image, tex, opts).unwrap();
    steal_texture(&rendering.color_img, &corr).unwrap()
}

pub fn texture_round_trip() -> Outcome {
    const RES: usize = 256;
    const TEX: usize = 128;
    let assets = head_assets();
    let albedo = TextureMap {
        res: assets.tex_res,
        texels: assets.albedo_mean.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
    };
    let truth: Vec<[f64; 3]> = (0..TEX * TEX)
        .map(|i| {
            let (row, col) = (i / TEX, i % TEX);
            albedo.sample((col as f64 + 0.5) / TEX as f64, (row as f64 + 0.5) / TEX as f64)
        })
        .collect();
    let front = steal_head(&assets, &albedo, 0.0, RES, TEX);
    let (mae, n) = masked_mae(&front.texels, &truth, |i| front.visible[i]);
    let left = steal_head(&assets, &albedo, -0.3, RES, TEX);
    let right = steal_head(&assets, &albedo, 0.3, RES, TEX);
    let (pair, overlap) = masked_mae(&left.texels, &right.texels, |i| left.visible[i] && right.visible[i]);
    Outcome::new(
        "render, steal round trip and pose-pair agreement",
        mae < 2.0 / 255.0 && pair < 4.0 / 255.0 && n > 0 && overlap > 0,
        format!(
            "round trip MAE {:.3}/255 over {n} texels, pose pair MAE {:.3}/255 over {overlap} texels",
            255.0 * mae,
            255.0 * pair
        ),
    )
}

fn random_unit(r: &mut impl Rng) -> Vec3<f64> {
    loop {
        let v = Vec3::new(r.sample(StandardNormal), r.sample(StandardNormal), r.sample(StandardNormal));
        if let Some(u) = v.try_normalize() {
            return u;
        }
    }
}

fn random_light(r: &mut impl Rng) -> LightingParams<f64> {
    let flat: Vec<f64> = (0..27).map(|_| r.random_range(-1.0..1.0)).collect();
    LightingParams::from_flat(&flat).unwrap()
}

pub fn sh_shading() -> Outcome {
    let y0 = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
    let mut r = rng(9);
    let mut y0_err = 0.0f64;
    let mut const_err = 0.0f64;
    let mut lin_err = 0.0f64;
    let unit = LightingParams::constant_unit();
    for _ in 0..10_000 {
        let n = random_unit(&mut r);
        y0_err = y0_err.max((sh_basis(n).unwrap()[0] - y0).abs());
        let albedo = [r.random_range(0.0..1.0), r.random_range(0.0..1.0), r.random_range(0.0..1.0)];
        let c = shade(albedo, n, &unit);
        for ch in 0..3 {
            const_err = const_err.max((c[ch] - albedo[ch]).abs());
        }
        let (l1, l2) = (random_light(&mut r), random_light(&mut r));
        let sum = shade_unclamped(albedo, n, &l1.add(&l2));
        let (a, b) = (shade_unclamped(albedo, n, &l1), shade_unclamped(albedo, n, &l2));
        for ch in 0..3 {
            lin_err = lin_err.max((sum[ch] - (a[ch] + b[ch])).abs());
        }
    }
    // The same property through the renderer: flat grey under unit irradiance.
    let sphere = icosphere(3, 1.0);
    let atlas = per_face_atlas(sphere.faces.len());
    let sphere = sphere.with_uv(atlas).unwrap();
    let cam = CameraParams::new(24.0, 32.0, 32.0).unwrap();
    let buffers = rasterize(&sphere, &cam, ImageSpec::new(64).unwrap());
    let grey = TextureMap::constant(32, [0.5; 3]);
    let img = facecond::render_textured(&buffers, &sphere, &grey, &unit).unwrap();
    for (px, &m) in img.pixels.iter().zip(&buffers.mask) {
        if m {
            for c in px {
                const_err = const_err.max((c - 0.5).abs());
            }
        }
    }
    Outcome::new(
        "SH band-0 constant, constant irradiance and linearity in light",
        y0_err < 1e-9 && const_err < 1.0 / 255.0 && lin_err < 1e-9,
        format!("Y0 error {y0_err:.2e}, constant-light error {const_err:.2e}, linearity error {lin_err:.2e}"),
    )
}

fn normal_vec(r: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

pub fn model_invariants() -> Outcome {
    let assets = head_assets();
    let template = &assets.template;
    let v = template.len();
    let mut r = rng(1000);
    let mut lin_rel = 0.0f64;
    let mut rigid_rel = 0.0f64;
    let mut jaw_moved = 0usize;
    let still: Vec<usize> = (0..v).filter(|&i| assets.jaw_weights[i] == 0.0).collect();
    for _ in 0..1000 {
        let mut p1 = FlameParams::zeros();
        let mut p2 = FlameParams::zeros();
        p1.beta = normal_vec(&mut r, 100);
        p1.psi = normal_vec(&mut r, 50);
        p2.beta = normal_vec(&mut r, 100);
        p2.psi = normal_vec(&mut r, 50);
        let mut p12 = FlameParams::zeros();
        p12.beta = p1.beta.iter().zip(&p2.beta).map(|(a, b)| a + b).collect();
        p12.psi = p1.psi.iter().zip(&p2.psi).map(|(a, b)| a + b).collect();
        let (m1, m2, m12) = (
            evaluate(&assets, &p1).unwrap(),
            evaluate(&assets, &p2).unwrap(),
            evaluate(&assets, &p12).unwrap(),
        );
        let mut err = 0.0f64;
        let mut mag = 0.0f64;
        for i in 0..v {
            let lhs = m12.vertices[i] - template[i];
            let rhs = (m1.vertices[i] - template[i]) + (m2.vertices[i] - template[i]);
            err = err.max((lhs - rhs).norm());
            mag = mag.max(lhs.norm()).max(rhs.norm());
        }
        lin_rel = lin_rel.max(err / mag);

        // Rigidity of the global rotation with the jaw closed.
        let mut posed = p1.clone();
        let axis = random_unit(&mut r).scale(r.random_range(-std::f64::consts::PI..std::f64::consts::PI));
        posed.theta[..3].copy_from_slice(&axis.to_array());
        let mp = evaluate(&assets, &posed).unwrap();
        for _ in 0..200 {
            let (i, j) = (r.random_range(0..v), r.random_range(0..v));
            let d0 = (m1.vertices[i] - m1.vertices[j]).norm();
            let d1 = (mp.vertices[i] - mp.vertices[j]).norm();
            if d0 > 0.0 {
                rigid_rel = rigid_rel.max((d1 - d0).abs() / d0);
            }
        }

        // Jaw locality: zero-weight vertices ignore any jaw rotation.
        let mut jaw = p1.clone();
        let j = random_unit(&mut r).scale(r.random_range(0.0..1.0));
        jaw.theta[3..].copy_from_slice(&j.to_array());
        let mj = evaluate(&assets, &jaw).unwrap();
        jaw_moved += still.iter().filter(|&&i| mj.vertices[i] != m1.vertices[i]).count();
    }
    Outcome::new(
        "blendshape linearity, rotation rigidity and jaw locality over 1000 draws",
        lin_rel <= 1e-9 && rigid_rel <= 1e-9 && jaw_moved == 0 && !still.is_empty(),
        format!(
            "linearity {lin_rel:.2e} rel, rigidity {rigid_rel:.2e} rel, {jaw_moved} of {} zero-weight vertices moved",
            still.len()
        ),
    )
}

pub fn eye_solver() -> Outcome {
    const RES: usize = 256;
    let assets = head_assets();
    let mut r = rng(6);
    let mut worst_mid = 0.0f64;
    let mut worst_dist = 0.0f64;
    let mut failures = 0usize;
    for _ in 0..1000 {
        let mut flame = FlameParams::zeros();
        for k in 0..3 {
            flame.beta[k] = r.sample(StandardNormal);
            flame.psi[k] = r.sample(StandardNormal);
        }
        flame.theta[0] = r.random_range(-0.4..0.4);
        flame.theta[1] = r.random_range(-1.2..1.2);
        flame.theta[2] = r.random_range(-0.4..0.4);
        flame.theta[3] = r.random_range(0.0..0.26);
        let mesh = evaluate(&assets, &flame).unwrap();
        let iod = r.random_range(0.1..0.4) * RES as f64;
        let center = (r.random_range(0.3..0.7) * RES as f64, r.random_range(0.3..0.7) * RES as f64);
        let Ok(cam) = camera_from_eyes(&mesh, &assets, iod, center) else {
            failures += 1;
            continue;
        };
        let [a, b] = assets.eye_vertex_ids.map(|i| cam.project(mesh.vertices[i as usize]));
        let mid = ((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        worst_mid = worst_mid.max((mid.0 - center.0).abs()).max((mid.1 - center.1).abs());
        worst_dist = worst_dist.max(((a.x - b.x).hypot(a.y - b.y) - iod).abs());
    }
    let mut profile = FlameParams::zeros();
    profile.theta[1] = std::f64::consts::FRAC_PI_2;
    let profile_mesh = evaluate(&assets, &profile).unwrap();
    let profile_err = matches!(
        camera_from_eyes(&profile_mesh, &assets, 64.0, (128.0, 128.0)),
        Err(Error::DegenerateEyes { .. })
    );
    let frontal = camera_from_eyes(&evaluate(&assets, &FlameParams::zeros()).unwrap(), &assets, 64.0, (128.0, 128.0))
        .unwrap();
    let mut turned = FlameParams::zeros();
    turned.theta[1] = std::f64::consts::FRAC_PI_3;
    let turned = camera_from_eyes(&evaluate(&assets, &turned).unwrap(), &assets, 64.0, (128.0, 128.0)).unwrap();
    Outcome::new(
        "eye-centering solver post-conditions over 1000 poses, profile error",
        worst_mid <= 1e-6 && worst_dist <= 1e-6 && failures == 0 && profile_err && turned.scale > frontal.scale,
        format!(
            "midpoint {worst_mid:.2e}px, interocular {worst_dist:.2e}px, {failures} unsolved, profile error {profile_err}, scale {:.1} at yaw pi/3 vs {:.1} frontal",
            turned.scale, frontal.scale
        ),
    )
}

pub fn sampling_protocol() -> Outcome {
    const DRAWS: u64 = 100_000;
    let assets = gen_synthetic_assets(3, 400, 32).unwrap();
    let image = ImageSpec::new(64).unwrap();
    let mut yaw = (f64::INFINITY, f64::NEG_INFINITY);
    let mut jaw = (f64::INFINITY, f64::NEG_INFINITY);
    let mut nonzero_tail = 0usize;
    let mut other_pose = 0usize;
    let mut lead = [0.0f64; 2];
    for seed in 0..DRAWS {
        let p = sample_params(seed, &assets, image).unwrap();
        let f = &p.flame;
        yaw = (yaw.0.min(f.theta[1]), yaw.1.max(f.theta[1]));
        jaw = (jaw.0.min(f.theta[3]), jaw.1.max(f.theta[3]));
        nonzero_tail += f.beta[3..].iter().filter(|&&x| x != 0.0).count();
        nonzero_tail += f.psi[3..].iter().filter(|&&x| x != 0.0).count();
        nonzero_tail += p.appearance.alpha[3..].iter().filter(|&&x| x != 0.0).count();
        other_pose += [0, 2, 4, 5].iter().filter(|&&k| f.theta[k] != 0.0).count();
        lead[0] += f.beta[0];
        lead[1] += f.beta[0] * f.beta[0];
    }
    let n = DRAWS as f64;
    let (mean, var) = (lead[0] / n, lead[1] / n - (lead[0] / n).powi(2));
    let in_range = yaw.0 >= HEAD_YAW_RANGE.0 && yaw.1 <= HEAD_YAW_RANGE.1 && jaw.0 >= JAW_OPEN_RANGE.0 && jaw.1 <= JAW_OPEN_RANGE.1;
    let spans = yaw.0 < HEAD_YAW_RANGE.0 + 1e-3
        && yaw.1 > HEAD_YAW_RANGE.1 - 1e-3
        && jaw.0 < JAW_OPEN_RANGE.0 + 1e-3
        && jaw.1 > JAW_OPEN_RANGE.1 - 1e-3;
    Outcome::new(
        "sampling ranges and zeroed non-leading components over 1e5 draws",
        in_range && spans && nonzero_tail == 0 && other_pose == 0 && mean.abs() < 0.02 && (var - 1.0).abs() < 0.02,
        format!(
            "yaw [{:.5}, {:.5}], jaw [{:.5}, {:.5}], {nonzero_tail} nonzero tail entries, beta0 mean {mean:.4} var {var:.4}",
            yaw.0, yaw.1, jaw.0, jaw.1
        ),
    )
}

/// Largest deviation between each stored level and a 2x2 mean of the level
/// above it.
pub fn pooling_error(levels: &[StackLevel<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for pair in levels.windows(2) {
        let (hi, lo) = (&pair[0], &pair[1]);
        for row in 0..lo.res {
            for col in 0..lo.res {
                for ch in 0..6 {
                    let mean = (hi.get(2 * row, 2 * col, ch)
                        + hi.get(2 * row, 2 * col + 1, ch)
                        + hi.get(2 * row + 1, 2 * col, ch)
                        + hi.get(2 * row + 1, 2 * col + 1, ch))
                        / 4.0;
                    worst = worst.max((lo.get(row, col, ch) - mean).abs());
                }
            }
        }
    }
    worst
}

fn dir_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

pub fn dataset_determinism() -> Outcome {
    let assets = gen_synthetic_assets(5, 1200, 64).unwrap();
    let image = ImageSpec::new(64).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    make_dataset(&assets, 8, a.path(), 1, image, DatasetOptions::default()).unwrap();
    make_dataset(&assets, 8, b.path(), 1, image, DatasetOptions::default()).unwrap();
    let (fa, fb) = (dir_bytes(a.path()), dir_bytes(b.path()));
    let identical = fa == fb;
    let valid = validate_manifest(a.path()).is_ok();

    let manifest = validate_manifest(a.path()).unwrap();
    let mut stored = 0.0f64;
    for rec in &manifest.records {
        let bytes = std::fs::read(a.path().join(&rec.conditioning)).unwrap();
        let stack = formats::stack_from_bytes::<f64>(&bytes).unwrap();
        stored = stored.max(pooling_error(&stack.levels));
    }
    let mut r = rng(64);
    let random = StackLevel {
        res: 64,
        data: (0..64 * 64 * 6).map(|_| r.random_range(0.0..1.0)).collect(),
    };
    let mut levels = vec![random];
    while levels.last().unwrap().res > 4 {
        let next = pool_2x2(levels.last().unwrap());
        levels.push(next);
    }
    let fresh = pooling_error(&levels);
    Outcome::new(
        "dataset bytes repeat under a fixed seed, pyramid pooling invariant",
        identical && valid && stored <= 1e-6 && fresh <= 1e-6,
        format!(
            "{} files identical {identical}, manifest valid {valid}, pooling error {stored:.2e} stored / {fresh:.2e} in memory",
            fa.len()
        ),
    )
}

pub fn all() -> Vec<fn() -> Outcome> {
    vec![
        rasterizer_oracle,
        visibility_oracle,
        texture_round_trip,
        sh_shading,
        model_invariants,
        eye_solver,
        sampling_protocol,
        dataset_determinism,
    ]
}
