//! Gradient estimators and rendering drivers.

pub mod classic;
pub mod sensor;
pub mod spherical;
pub mod threepoint;
pub(crate) mod walk;

pub use sensor::SensorRef;
pub use threepoint::{
    ad_threepoint, sample_path, sample_path_adjoint, sample_path_pixel, PathReplayState,
};

use crate::rng::{derive_seed, PathRng};
use crate::scene::Scene;
use rayon::prelude::*;
use thiserror::Error;

/// The gradient estimators under test plus the finite-difference oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    PrbThreepoint,
    AdThreepoint,
    AdSpherical,
    PrbClassic,
    Fd,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::PrbThreepoint,
        Method::AdThreepoint,
        Method::AdSpherical,
        Method::PrbClassic,
        Method::Fd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::PrbThreepoint => "prb_threepoint",
            Method::AdThreepoint => "ad_threepoint",
            Method::AdSpherical => "ad_spherical",
            Method::PrbClassic => "prb_classic",
            Method::Fd => "fd",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("finite-difference step {h} below safe minimum {min} (catastrophic cancellation)")]
    FdStepTooSmall { h: f64, min: f64 },
    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),
}

/// Rendering parameters shared by all methods.
#[derive(Clone, Debug)]
pub struct IntegratorConfig {
    /// Maximum number of path segments (camera→first vertex is segment 1).
    pub max_depth: u32,
    pub spp: u32,
    pub seed: u64,
    /// Next-event stratification grid; grid² emitter samples per vertex.
    pub nee_grid: u32,
    /// Pixel reconstruction filter radius in pixels.
    pub filter_radius: f64,
    /// Drop every reparameterization-determinant derivative line (ablation).
    pub disable_det_derivative: bool,
    /// Finite-difference step; `None` uses 1e-3 × scene extent.
    pub fd_eps: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            max_depth: 3,
            spp: 64,
            seed: 1,
            nee_grid: 3,
            filter_radius: 2.5,
            disable_det_derivative: false,
            fd_eps: None,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.max_depth == 0 || self.max_depth > 16 {
            return Err(RenderError::InvalidConfig("max_depth must be in 1..=16".into()));
        }
        if self.spp == 0 {
            return Err(RenderError::InvalidConfig("spp must be >= 1".into()));
        }
        if !(1..=3).contains(&self.nee_grid) {
            return Err(RenderError::InvalidConfig("nee_grid must be in 1..=3".into()));
        }
        if !(self.filter_radius > 0.0 && self.filter_radius <= 8.0) {
            return Err(RenderError::InvalidConfig("filter_radius must be in (0, 8]".into()));
        }
        Ok(())
    }
}

/// Per-pixel RGB grid used for both radiance and gradient images.
#[derive(Clone, Debug, PartialEq)]
pub struct GradImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<[f64; 3]>,
}

impl GradImage {
    pub fn new(width: u32, height: u32) -> Self {
        GradImage { width, height, data: vec![[0.0; 3]; (width * height) as usize] }
    }

    #[inline]
    pub fn at(&self, x: u32, y: u32) -> [f64; 3] {
        self.data[(y * self.width + x) as usize]
    }

    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.data.iter().map(|p| p[c]).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|p| p.iter().all(|v| v.is_finite()))
    }

    /// Σ|v| over one channel.
    pub fn l1_norm(&self, c: usize) -> f64 {
        self.data.iter().map(|p| p[c].abs()).sum()
    }
}

/// Deterministic per-pixel parallel map: pixels are independent work items
/// and each pixel accumulates its samples sequentially, so results are
/// identical for any worker count.
fn per_pixel<F>(width: u32, height: u32, f: F) -> GradImage
where
    F: Fn(u32, u32) -> [f64; 3] + Sync,
{
    let data: Vec<[f64; 3]> = (0..width * height)
        .into_par_iter()
        .map(|i| f(i % width, i / width))
        .collect();
    GradImage { width, height, data }
}

/// Forward render at an explicit parameter value (used by the oracle).
pub fn render_image_at(scene: &Scene, pi: f64, cfg: &IntegratorConfig) -> GradImage {
    let (w, h) = (scene.camera.width, scene.camera.height);
    per_pixel(w, h, |x, y| {
        let mut acc = [0.0f64; 3];
        for s in 0..cfg.spp {
            let rng = PathRng::new(cfg.seed, y * w + x, s);
            let l = sample_path_pixel(scene, pi, (x, y), &rng, cfg);
            for c in 0..3 {
                acc[c] += l[c];
            }
        }
        acc.map(|v| v / cfg.spp as f64)
    })
}

/// Forward render at the scene's initial parameter value.
pub fn render_image(scene: &Scene, cfg: &IntegratorConfig) -> GradImage {
    render_image_at(scene, scene.pi_init, cfg)
}

/// Central finite differences with common random numbers.
pub fn fd_gradient(scene: &Scene, h: f64, cfg: &IntegratorConfig) -> Result<GradImage, RenderError> {
    let min = 1e-7 * scene.extent();
    if h < min {
        return Err(RenderError::FdStepTooSmall { h, min });
    }
    let up = render_image_at(scene, scene.pi_init + h, cfg);
    let dn = render_image_at(scene, scene.pi_init - h, cfg);
    let mut out = GradImage::new(up.width, up.height);
    for (o, (a, b)) in out.data.iter_mut().zip(up.data.iter().zip(dn.data.iter())) {
        for c in 0..3 {
            o[c] = (a[c] - b[c]) / (2.0 * h);
        }
    }
    Ok(out)
}

pub fn default_fd_eps(scene: &Scene, cfg: &IntegratorConfig) -> f64 {
    cfg.fd_eps.unwrap_or(1e-3 * scene.extent())
}

/// Per-pixel sensor references for the surface-form methods: a reference
/// radiance image from a decorrelated seed stream plus the center-ray
/// plane model.
pub fn sensor_refs(scene: &Scene, cfg: &IntegratorConfig) -> Vec<SensorRef> {
    let pre_cfg = IntegratorConfig { seed: derive_seed(cfg.seed, 0x5EED_04EF), ..cfg.clone() };
    let lref = render_image(scene, &pre_cfg);
    let (w, h) = (scene.camera.width, scene.camera.height);
    (0..w * h)
        .into_par_iter()
        .map(|i| SensorRef::build(scene, (i % w, i / w), lref.data[i as usize]))
        .collect()
}

/// Per-pixel ∂L/∂π for the requested method; deterministic for a fixed
/// (seed, method, config).
pub fn render_gradient(
    scene: &Scene,
    method: Method,
    cfg: &IntegratorConfig,
) -> Result<GradImage, RenderError> {
    cfg.validate()?;
    let (img, _) = render_gradient_impl(scene, method, cfg, false)?;
    Ok(img)
}

/// As [`render_gradient`] but also returns the per-pixel standard error of
/// the mean (per channel), for statistical tests.
pub fn render_gradient_with_stats(
    scene: &Scene,
    method: Method,
    cfg: &IntegratorConfig,
) -> Result<(GradImage, GradImage), RenderError> {
    cfg.validate()?;
    let (img, se) = render_gradient_impl(scene, method, cfg, true)?;
    Ok((img, se.expect("stats requested")))
}

fn render_gradient_impl(
    scene: &Scene,
    method: Method,
    cfg: &IntegratorConfig,
    with_stats: bool,
) -> Result<(GradImage, Option<GradImage>), RenderError> {
    let (w, h) = (scene.camera.width, scene.camera.height);

    if method == Method::Fd {
        let hstep = default_fd_eps(scene, cfg);
        let min = 1e-7 * scene.extent();
        if hstep < min {
            return Err(RenderError::FdStepTooSmall { h: hstep, min });
        }
        if with_stats {
            // per-sample central differences share random numbers
            let pi0 = scene.pi_init;
            let (mean, se) = per_pixel_stats(w, h, cfg, |x, y, s| {
                let rng = PathRng::new(cfg.seed, y * w + x, s);
                let up = sample_path_pixel(scene, pi0 + hstep, (x, y), &rng, cfg);
                let dn = sample_path_pixel(scene, pi0 - hstep, (x, y), &rng, cfg);
                [
                    (up[0] - dn[0]) / (2.0 * hstep),
                    (up[1] - dn[1]) / (2.0 * hstep),
                    (up[2] - dn[2]) / (2.0 * hstep),
                ]
            });
            return Ok((mean, Some(se)));
        }
        return fd_gradient(scene, hstep, cfg).map(|g| (g, None));
    }

    let refs = match method {
        Method::PrbThreepoint | Method::AdThreepoint => sensor_refs(scene, cfg),
        _ => Vec::new(),
    };

    let sample = |x: u32, y: u32, s: u32| -> [f64; 3] {
        let rng = PathRng::new(cfg.seed, y * w + x, s);
        match method {
            Method::PrbThreepoint => {
                let l = sample_path_pixel(scene, scene.pi_init, (x, y), &rng, cfg);
                let r = &refs[(y * w + x) as usize];
                let (dpi, _) = threepoint::sample_path_adjoint_rgb(scene, (x, y), &rng, l, cfg, r);
                dpi
            }
            Method::AdThreepoint => {
                let r = &refs[(y * w + x) as usize];
                threepoint::ad_threepoint(scene, (x, y), &rng, cfg, r).dpi()
            }
            Method::AdSpherical => spherical::ad_spherical(scene, (x, y), &rng, cfg).dpi(),
            Method::PrbClassic => {
                let l = sample_path_pixel(scene, scene.pi_init, (x, y), &rng, cfg);
                classic::prb_classic_rgb(scene, (x, y), &rng, l, cfg)
            }
            Method::Fd => unreachable!(),
        }
    };

    if with_stats {
        let (mean, se) = per_pixel_stats(w, h, cfg, sample);
        Ok((mean, Some(se)))
    } else {
        let img = per_pixel(w, h, |x, y| {
            let mut acc = [0.0f64; 3];
            for s in 0..cfg.spp {
                let v = sample(x, y, s);
                for c in 0..3 {
                    acc[c] += v[c];
                }
            }
            acc.map(|v| v / cfg.spp as f64)
        });
        Ok((img, None))
    }
}

fn per_pixel_stats<F>(w: u32, h: u32, cfg: &IntegratorConfig, sample: F) -> (GradImage, GradImage)
where
    F: Fn(u32, u32, u32) -> [f64; 3] + Sync,
{
    let n = cfg.spp as f64;
    let pairs: Vec<([f64; 3], [f64; 3])> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let mut acc = [0.0f64; 3];
            let mut acc2 = [0.0f64; 3];
            for s in 0..cfg.spp {
                let v = sample(x, y, s);
                for c in 0..3 {
                    acc[c] += v[c];
                    acc2[c] += v[c] * v[c];
                }
            }
            let mean = acc.map(|v| v / n);
            let mut se = [0.0f64; 3];
            for c in 0..3 {
                let var = ((acc2[c] / n) - mean[c] * mean[c]).max(0.0) * n / (n - 1.0).max(1.0);
                se[c] = (var / n).sqrt();
            }
            (mean, se)
        })
        .collect();
    let mean = GradImage { width: w, height: h, data: pairs.iter().map(|p| p.0).collect() };
    let se = GradImage { width: w, height: h, data: pairs.iter().map(|p| p.1).collect() };
    (mean, se)
}
