//! Case-study scenes and harnesses: method comparisons against the
//! finite-difference oracle, the determinant ablation, and a one-parameter
//! depth-recovery task.
//!
//! All three settings view a 1×1 m slab two meters in front of the camera
//! whose depth is driven by π. A floor patch below the slab provides the
//! indirect illumination in settings 2 and 3. In the occluding variant the
//! slab covers the whole view and the floor is large; the fully-visible
//! variant shrinks slab and floor so neither the camera nor any slab point
//! ever sees a moving silhouette.

use crate::integrator::{
    default_fd_eps, render_gradient, render_image, sensor_refs, GradImage, IntegratorConfig,
    Method, RenderError,
};
use crate::math::Vec3;
use crate::radiometry::{Bsdf, Emitter, TexAxis, Texture};
use crate::rng::{derive_seed, PathRng};
use crate::scene::{Camera, PiBinding, Scene, Shape};
use rayon::prelude::*;
use serde::Serialize;

/// Case-study selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CaseSetting {
    pub id: u8,
    pub variant: Variant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Occluding,
    FullyVisible,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Occluding => "occluding",
            Variant::FullyVisible => "fully_visible",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "occluding" => Some(Variant::Occluding),
            "fully_visible" | "fully-visible" => Some(Variant::FullyVisible),
            _ => None,
        }
    }
}

const SLAB_DEPTH: f64 = 2.0;
const FLOOR_Y: f64 = -1.5;

fn case_camera(res: u32) -> Camera {
    Camera::new(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 1.0, 0.0), 20.0, res, res)
}

/// The moving slab; u runs along +y so a u-gradient varies vertically in
/// the image. Normal faces the camera.
fn slab(half: f64, bsdf: usize, emitter: Option<usize>) -> Shape {
    Shape {
        origin: Vec3::new(-half, -half, SLAB_DEPTH),
        edge_u: Vec3::new(0.0, 2.0 * half, 0.0),
        edge_v: Vec3::new(2.0 * half, 0.0, 0.0),
        binding: Some(PiBinding { axis: Vec3::new(0.0, 0.0, 1.0), scale: 1.0 }),
        bsdf,
        emitter,
    }
}

/// Static floor patch below the slab; u runs along +z so a u-gradient in
/// its emission makes the illumination arriving at the slab shift as the
/// slab translates. Normal faces up.
fn floor_patch(variant: Variant, bsdf: usize, emitter: Option<usize>) -> Shape {
    let (half, z0) = match variant {
        Variant::Occluding => (2.0, 1.4),
        Variant::FullyVisible => (0.5, 1.6),
    };
    Shape {
        origin: Vec3::new(-half, FLOOR_Y, z0),
        edge_u: Vec3::new(0.0, 0.0, 2.0 * half),
        edge_v: Vec3::new(2.0 * half, 0.0, 0.0),
        binding: None,
        bsdf,
        emitter,
    }
}

fn slab_half(variant: Variant) -> f64 {
    match variant {
        Variant::Occluding => 0.5,
        Variant::FullyVisible => 0.25,
    }
}

fn gradient_tex(peak: f64) -> Texture {
    Texture::LinearGradient { axis: TexAxis::U, from: [0.0; 3], to: [peak; 3] }
}

/// Builds the case-study scene at π = 0 with the given image resolution.
pub fn build_case_scene(setting: CaseSetting, res: u32) -> Scene {
    let cam = case_camera(res);
    let black = Bsdf::diffuse(Texture::Constant { rgb: [0.0; 3] });
    match setting.id {
        1 => {
            // emissive gradient-textured slab moving away from the camera
            let emitter = Emitter {
                radiance: gradient_tex(1.0),
                two_sided: false,
                pi_scales_radiance: false,
            };
            let shapes = vec![slab(slab_half(setting.variant), 0, Some(0))];
            Scene::new(shapes, vec![black], vec![emitter], cam, 0.0)
        }
        2 => {
            // gradient-albedo slab lit from below by a constant emitter
            let slab_bsdf = Bsdf::diffuse(gradient_tex(1.0));
            let emitter = Emitter {
                radiance: Texture::Constant { rgb: [5.0; 3] },
                two_sided: false,
                pi_scales_radiance: false,
            };
            let shapes = vec![
                slab(slab_half(setting.variant), 0, None),
                floor_patch(setting.variant, 1, Some(0)),
            ];
            Scene::new(shapes, vec![slab_bsdf, black], vec![emitter], cam, 0.0)
        }
        3 => {
            // constant-albedo slab lit from below by a gradient emitter
            let slab_bsdf = Bsdf::diffuse(Texture::Constant { rgb: [0.8; 3] });
            let emitter = Emitter {
                radiance: gradient_tex(8.0),
                two_sided: false,
                pi_scales_radiance: false,
            };
            let shapes = vec![
                slab(slab_half(setting.variant), 0, None),
                floor_patch(setting.variant, 1, Some(0)),
            ];
            Scene::new(shapes, vec![slab_bsdf, black], vec![emitter], cam, 0.0)
        }
        other => panic!("unknown setting {other}"),
    }
}

/// Same scene with the slab's π-binding removed (static geometry).
pub fn build_case_scene_unbound(setting: CaseSetting, res: u32) -> Scene {
    let s = build_case_scene(setting, res);
    let shapes = s
        .shapes
        .iter()
        .map(|sh| Shape { binding: None, ..sh.clone() })
        .collect();
    Scene::new(shapes, s.bsdfs.clone(), s.emitters.clone(), s.camera.clone(), s.pi_init)
}

/// Per-method comparison metrics against the finite-difference oracle,
/// evaluated on one channel.
#[derive(Clone, Debug, Serialize)]
pub struct MethodReport {
    pub method: String,
    pub mae: f64,
    pub rel_l1_vs_fd: f64,
    pub grad_l1_norm: f64,
    pub sign_agreement: f64,
    pub runtime_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub setting: u8,
    pub variant: String,
    pub channel: usize,
    pub resolution: u32,
    pub spp: u32,
    pub fd_spp: u32,
    pub seed: u64,
    pub methods: Vec<MethodReport>,
    pub fd_l1_norm: f64,
}

/// Σ|a−b| / Σ|b| on one channel.
pub fn rel_l1(a: &GradImage, b: &GradImage, c: usize) -> f64 {
    let num: f64 = a
        .data
        .iter()
        .zip(b.data.iter())
        .map(|(x, y)| (x[c] - y[c]).abs())
        .sum();
    num / b.l1_norm(c).max(1e-300)
}

pub fn mae(a: &GradImage, b: &GradImage, c: usize) -> f64 {
    let num: f64 = a
        .data
        .iter()
        .zip(b.data.iter())
        .map(|(x, y)| (x[c] - y[c]).abs())
        .sum();
    num / a.data.len() as f64
}

/// Fraction of pixels whose sign matches the reference, among pixels where
/// the reference is meaningfully nonzero.
pub fn sign_agreement(a: &GradImage, fd: &GradImage, c: usize) -> f64 {
    let thresh = 0.02 * fd.data.iter().map(|p| p[c].abs()).fold(0.0, f64::max);
    let mut n = 0usize;
    let mut agree = 0usize;
    for (x, y) in a.data.iter().zip(fd.data.iter()) {
        if y[c].abs() > thresh {
            n += 1;
            if x[c].signum() == y[c].signum() {
                agree += 1;
            }
        }
    }
    if n == 0 {
        1.0
    } else {
        agree as f64 / n as f64
    }
}

/// Renders the oracle and each requested method, returning metrics and the
/// gradient images (fd last).
pub fn run_comparison(
    scene: &Scene,
    setting: CaseSetting,
    methods: &[Method],
    cfg: &IntegratorConfig,
    fd_spp: u32,
    channel: usize,
) -> Result<(ComparisonReport, Vec<(Method, GradImage)>), RenderError> {
    let fd_cfg = IntegratorConfig { spp: fd_spp, ..cfg.clone() };
    let fd = render_gradient(scene, Method::Fd, &fd_cfg)?;
    let mut reports = Vec::new();
    let mut images = Vec::new();
    for &m in methods {
        let t0 = std::time::Instant::now();
        let g = render_gradient(scene, m, cfg)?;
        let dt = t0.elapsed().as_secs_f64();
        reports.push(MethodReport {
            method: m.name().to_string(),
            mae: mae(&g, &fd, channel),
            rel_l1_vs_fd: rel_l1(&g, &fd, channel),
            grad_l1_norm: g.l1_norm(channel),
            sign_agreement: sign_agreement(&g, &fd, channel),
            runtime_seconds: dt,
        });
        images.push((m, g));
    }
    let report = ComparisonReport {
        setting: setting.id,
        variant: setting.variant.name().to_string(),
        channel,
        resolution: scene.camera.width,
        spp: cfg.spp,
        fd_spp,
        seed: cfg.seed,
        methods: reports,
        fd_l1_norm: fd.l1_norm(channel),
    };
    images.push((Method::Fd, fd));
    Ok((report, images))
}

/// Ablation: the surface-form replay with and without the determinant
/// derivative lines, both measured against the oracle.
#[derive(Clone, Debug, Serialize)]
pub struct AblationReport {
    pub setting: u8,
    pub variant: String,
    pub full_rel_l1: f64,
    pub ablated_rel_l1: f64,
}

pub fn ablate_determinant(
    scene: &Scene,
    setting: CaseSetting,
    cfg: &IntegratorConfig,
    fd_spp: u32,
    channel: usize,
) -> Result<AblationReport, RenderError> {
    let fd_cfg = IntegratorConfig { spp: fd_spp, ..cfg.clone() };
    let fd = render_gradient(scene, Method::Fd, &fd_cfg)?;
    let full = render_gradient(scene, Method::PrbThreepoint, cfg)?;
    let ablated_cfg = IntegratorConfig { disable_det_derivative: true, ..cfg.clone() };
    let ablated = render_gradient(scene, Method::PrbThreepoint, &ablated_cfg)?;
    Ok(AblationReport {
        setting: setting.id,
        variant: setting.variant.name().to_string(),
        full_rel_l1: rel_l1(&full, &fd, channel),
        ablated_rel_l1: rel_l1(&ablated, &fd, channel),
    })
}

/// One gradient-descent iteration record.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OptStep {
    pub iteration: u32,
    pub pi: f64,
    pub loss: f64,
    pub grad: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizationTrace {
    pub target_pi: f64,
    pub steps: Vec<OptStep>,
    pub final_pi: f64,
    pub diverged: bool,
}

/// Mean absolute error between two images (all channels).
pub fn image_mae(a: &GradImage, b: &GradImage) -> f64 {
    let n = (a.data.len() * 3) as f64;
    a.data
        .iter()
        .zip(b.data.iter())
        .map(|(x, y)| (x[0] - y[0]).abs() + (x[1] - y[1]).abs() + (x[2] - y[2]).abs())
        .sum::<f64>()
        / n
}

/// ∂MAE/∂π at the scene's current π via the replay adjoint with
/// δL = ∂MAE/∂pixel, plus the loss itself.
pub fn loss_gradient(
    scene: &Scene,
    target: &GradImage,
    method: Method,
    cfg: &IntegratorConfig,
) -> Result<(f64, f64), RenderError> {
    let (w, h) = (scene.camera.width, scene.camera.height);
    let img = render_image(scene, cfg);
    let loss = image_mae(&img, target);
    let n = (img.data.len() * 3) as f64;

    let refs = match method {
        Method::PrbThreepoint | Method::AdThreepoint => sensor_refs(scene, cfg),
        _ => Vec::new(),
    };
    let grad: f64 = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let delta_l = {
                let rendered = img.data[i as usize];
                let tgt = target.data[i as usize];
                [
                    (rendered[0] - tgt[0]).signum() / n,
                    (rendered[1] - tgt[1]).signum() / n,
                    (rendered[2] - tgt[2]).signum() / n,
                ]
            };
            let mut acc = 0.0;
            for s in 0..cfg.spp {
                let rng = PathRng::new(cfg.seed, y * w + x, s);
                let dpi3 = match method {
                    Method::PrbThreepoint => {
                        let l = crate::integrator::sample_path_pixel(
                            scene,
                            scene.pi_init,
                            (x, y),
                            &rng,
                            cfg,
                        );
                        let r = &refs[i as usize];
                        crate::integrator::threepoint::sample_path_adjoint_rgb(
                            scene,
                            (x, y),
                            &rng,
                            l,
                            cfg,
                            r,
                        )
                        .0
                    }
                    Method::PrbClassic => {
                        let l = crate::integrator::sample_path_pixel(
                            scene,
                            scene.pi_init,
                            (x, y),
                            &rng,
                            cfg,
                        );
                        crate::integrator::classic::prb_classic_rgb(scene, (x, y), &rng, l, cfg)
                    }
                    _ => panic!("loss gradient supports the replay methods"),
                };
                acc += (dpi3[0] * delta_l[0] + dpi3[1] * delta_l[1] + dpi3[2] * delta_l[2])
                    / cfg.spp as f64;
            }
            acc
        })
        .sum();
    Ok((loss, grad))
}

fn with_pi(scene: &Scene, pi: f64) -> Scene {
    Scene::new(scene.shapes.clone(), scene.bsdfs.clone(), scene.emitters.clone(), scene.camera.clone(), pi)
}

/// Plain gradient descent on the mean absolute error of the rendered image
/// against a target rendered at `target_pi` with a held-out seed.
pub fn optimize_translation(
    scene: &Scene,
    method: Method,
    target_pi: f64,
    init_pi: f64,
    steps: u32,
    step_size: f64,
    cfg: &IntegratorConfig,
) -> Result<OptimizationTrace, RenderError> {
    let target_cfg = IntegratorConfig { seed: derive_seed(cfg.seed, 0x7A46_E7), ..cfg.clone() };
    let target = render_image(&with_pi(scene, target_pi), &target_cfg);

    let bound = 2.0 * scene.extent();
    let mut pi = init_pi;
    let mut trace = Vec::with_capacity(steps as usize);
    let mut diverged = false;
    for it in 0..steps {
        let cur = with_pi(scene, pi);
        let step_cfg = IntegratorConfig { seed: derive_seed(cfg.seed, it as u64), ..cfg.clone() };
        let (loss, grad) = loss_gradient(&cur, &target, method, &step_cfg)?;
        trace.push(OptStep { iteration: it, pi, loss, grad });
        pi -= step_size * grad;
        if !pi.is_finite() || pi.abs() > bound {
            diverged = true;
            break;
        }
    }
    Ok(OptimizationTrace { target_pi, steps: trace, final_pi: pi, diverged })
}

/// Brute-force loss sweep over a π grid with a fixed seed (the unimodality
/// certificate for the recovery task).
pub fn loss_sweep(
    scene: &Scene,
    target_pi: f64,
    lo: f64,
    hi: f64,
    count: u32,
    cfg: &IntegratorConfig,
) -> Vec<(f64, f64)> {
    let target_cfg = IntegratorConfig { seed: derive_seed(cfg.seed, 0x7A46_E7), ..cfg.clone() };
    let target = render_image(&with_pi(scene, target_pi), &target_cfg);
    (0..count)
        .map(|i| {
            let pi = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            let img = render_image(&with_pi(scene, pi), cfg);
            (pi, image_mae(&img, &target))
        })
        .collect()
}

pub fn fd_oracle_spp_default(cfg: &IntegratorConfig) -> u32 {
    cfg.spp.saturating_mul(4)
}

/// Default FD step for a scene (1e-3 × extent), exposed for harnesses.
pub fn fd_step(scene: &Scene, cfg: &IntegratorConfig) -> f64 {
    default_fd_eps(scene, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setting1_center_pixel_positive() {
        let scene = build_case_scene(CaseSetting { id: 1, variant: Variant::Occluding }, 16);
        let cfg = IntegratorConfig { spp: 8, ..Default::default() };
        let img = render_image(&scene, &cfg);
        let c = img.at(8, 8);
        assert!(c[0] > 0.0, "center pixel should see the emitter, got {c:?}");
    }

    #[test]
    fn setting3_depth1_black_off_emitter() {
        let scene = build_case_scene(CaseSetting { id: 3, variant: Variant::Occluding }, 16);
        let cfg = IntegratorConfig { spp: 8, max_depth: 1, ..Default::default() };
        let img = render_image(&scene, &cfg);
        // with fov 20° the emitter is never in view: whole image black
        assert!(img.data.iter().all(|p| p.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn occluding_slab_covers_view_fully_visible_does_not() {
        let occ = build_case_scene(CaseSetting { id: 1, variant: Variant::Occluding }, 32);
        let fv = build_case_scene(CaseSetting { id: 1, variant: Variant::FullyVisible }, 32);
        let cfg = IntegratorConfig { spp: 4, ..Default::default() };
        let img_occ = render_image(&occ, &cfg);
        let img_fv = render_image(&fv, &cfg);
        assert!(img_occ.data.iter().all(|p| p[0] > 0.0), "occluding slab must fill the view");
        let black = img_fv.data.iter().filter(|p| p[0] == 0.0).count();
        assert!(black > 0, "fully-visible slab must leave background pixels");
        // the fully-visible slab is still present
        assert!(img_fv.at(16, 16)[0] > 0.0);
    }

    #[test]
    fn fully_visible_setting2_emitter_seen_by_every_slab_point() {
        // exhaustive visibility sampling between slab and emitter points
        let scene = build_case_scene(CaseSetting { id: 2, variant: Variant::FullyVisible }, 16);
        let rng = PathRng::new(3, 0, 0);
        let slab = &scene.shapes[0];
        let floor = &scene.shapes[1];
        for i in 0..100_000u32 {
            let pi_v = 0.3 * rng.draw(500_000 + i);
            let a = slab.point([rng.draw(4 * i), rng.draw(4 * i + 1)], pi_v);
            let b = floor.point([rng.draw(4 * i + 2), rng.draw(4 * i + 3)], pi_v);
            assert!(scene.visibility(a, b, pi_v), "occlusion at {a:?} -> {b:?}");
        }
    }
}
