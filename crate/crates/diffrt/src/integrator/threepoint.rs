//! The surface-form estimators: forward path tracing, its replay adjoint,
//! and the forward-mode twin.
//!
//! All three consume the shared walk in `walk.rs`. The adjoint follows the
//! replay discipline: no derivatives are tracked across loop iterations;
//! each vertex contributes the derivative of its emitted radiance, of the
//! arriving segment's reparameterization determinant weighted by the
//! radiance still to be accounted for, and of its BSDF value weighted by
//! the radiance beyond the current vertex.

use crate::math::{backward_grad, Dual, PixelFilter, Spectrum, Vec3};
use crate::rng::PathRng;
use crate::scene::{ParamPoint, Scene};

use super::sensor::{sensor_contribution, SensorGeom, SensorRef};
use super::walk::{walk_pixel, walk_ray, PrevVertex, ThreePointVisitor};
use super::IntegratorConfig;

/// Forward accumulation: value-only radiance.
struct ForwardVisitor {
    beta: [f64; 3],
    l: [f64; 3],
}

impl ForwardVisitor {
    fn new() -> Self {
        ForwardVisitor { beta: [1.0; 3], l: [0.0; 3] }
    }
}

impl ThreePointVisitor for ForwardVisitor {
    fn sensor(&mut self, _tx: f64, _ty: f64, _geom: Option<&SensorGeom>) {}

    fn segment_det(&mut self, _d: Dual) {}

    fn emission(&mut self, term: Spectrum) {
        let v = term.value();
        for c in 0..3 {
            self.l[c] += self.beta[c] * v[c];
        }
    }

    fn nee(&mut self, term: Spectrum) {
        let v = term.value();
        for c in 0..3 {
            self.l[c] += self.beta[c] * v[c];
        }
    }

    fn bsdf(&mut self, f: Spectrum, pdf: f64) -> bool {
        let v = f.value();
        for c in 0..3 {
            self.beta[c] *= v[c] / pdf;
        }
        self.beta.iter().any(|&b| b > 0.0)
    }
}

/// Unbiased value estimate of the radiance reaching a pixel sample.
pub fn sample_path_pixel(
    scene: &Scene,
    pi: f64,
    pixel: (u32, u32),
    rng: &PathRng,
    cfg: &IntegratorConfig,
) -> [f64; 3] {
    let mut v = ForwardVisitor::new();
    walk_pixel(scene, Dual::constant(pi), pixel, rng, cfg, &mut v);
    v.l
}

/// Unbiased value estimate of the radiance along an arbitrary ray.
pub fn sample_path(
    scene: &Scene,
    pi: f64,
    origin: Vec3,
    dir: Vec3,
    rng: &PathRng,
    cfg: &IntegratorConfig,
) -> [f64; 3] {
    let mut v = ForwardVisitor::new();
    walk_ray(scene, Dual::constant(pi), origin, dir, rng, cfg, &mut v);
    v.l
}

/// State carried across the replay loop; no derivatives live here.
#[derive(Clone, Copy, Debug)]
pub struct PathReplayState {
    /// Radiance not yet accounted for by the replay (value-only).
    pub l: [f64; 3],
    /// Path throughput (value-only).
    pub beta: [f64; 3],
    pub p_prev: Option<ParamPoint>,
    pub p_cur: Option<ParamPoint>,
    /// Replay position: rng dimensions are addressed per bounce.
    pub bounce: u32,
}

/// Replay adjoint: per-channel gradient accumulation.
struct PrbVisitor<'a> {
    state: PathReplayState,
    dpi: [f64; 3],
    filter: &'a PixelFilter,
    sensor_ref: &'a SensorRef,
    l_total: [f64; 3],
    ablate: bool,
}

impl<'a> ThreePointVisitor for PrbVisitor<'a> {
    fn sensor(&mut self, tx: f64, ty: f64, geom: Option<&SensorGeom>) {
        let s = sensor_contribution(self.filter, tx, ty, geom, self.l_total, self.sensor_ref, self.ablate);
        for c in 0..3 {
            self.dpi[c] += s[c];
        }
    }

    fn vertex_begin(&mut self, bounce: u32, p_prev: PrevVertex, p_cur: ParamPoint) {
        self.state.bounce = bounce;
        self.state.p_prev = match p_prev {
            PrevVertex::Fixed(_) => None,
            PrevVertex::Point(p) => Some(p),
        };
        self.state.p_cur = Some(p_cur);
    }

    fn segment_det(&mut self, d: Dual) {
        if self.ablate {
            return;
        }
        // backward_grad(D, δL·L/D) with the radiance not yet consumed
        for c in 0..3 {
            self.dpi[c] += backward_grad(d, self.state.l[c] / d.val);
        }
    }

    fn emission(&mut self, term: Spectrum) {
        for c in 0..3 {
            let t = term.channel(c);
            self.dpi[c] += backward_grad(t, self.state.beta[c]);
            self.state.l[c] -= self.state.beta[c] * t.val;
        }
    }

    fn nee(&mut self, term: Spectrum) {
        for c in 0..3 {
            let t = term.channel(c);
            self.dpi[c] += backward_grad(t, self.state.beta[c]);
            self.state.l[c] -= self.state.beta[c] * t.val;
        }
    }

    fn bsdf(&mut self, f: Spectrum, pdf: f64) -> bool {
        // backward_grad(f, δL·L/f) with the radiance beyond this vertex
        for c in 0..3 {
            let fc = f.channel(c);
            if fc.val > 0.0 {
                self.dpi[c] += backward_grad(fc, self.state.l[c] / fc.val);
            }
            self.state.beta[c] *= fc.val / pdf;
        }
        self.state.beta.iter().any(|&b| b > 0.0)
    }
}

/// Replay adjoint for one pixel sample. `l_fwd` must be the value produced
/// by [`sample_path_pixel`] with the identical rng key. Returns ∂L/∂π per
/// channel plus the radiance the replay reconstructed (for fidelity
/// checks).
pub fn sample_path_adjoint_rgb(
    scene: &Scene,
    pixel: (u32, u32),
    rng: &PathRng,
    l_fwd: [f64; 3],
    cfg: &IntegratorConfig,
    sensor_ref: &SensorRef,
) -> ([f64; 3], [f64; 3]) {
    let filter = PixelFilter::new(cfg.filter_radius);
    let mut v = PrbVisitor {
        state: PathReplayState {
            l: l_fwd,
            beta: [1.0; 3],
            p_prev: None,
            p_cur: None,
            bounce: 0,
        },
        dpi: [0.0; 3],
        filter: &filter,
        sensor_ref,
        l_total: l_fwd,
        ablate: cfg.disable_det_derivative,
    };
    walk_pixel(scene, Dual::var(scene.pi_init), pixel, rng, cfg, &mut v);
    let consumed = [
        l_fwd[0] - v.state.l[0],
        l_fwd[1] - v.state.l[1],
        l_fwd[2] - v.state.l[2],
    ];
    (v.dpi, consumed)
}

/// Replay adjoint contracted with an adjoint radiance δL (the derivative of
/// the loss w.r.t. this pixel's value).
pub fn sample_path_adjoint(
    scene: &Scene,
    pixel: (u32, u32),
    rng: &PathRng,
    l_fwd: [f64; 3],
    delta_l: [f64; 3],
    cfg: &IntegratorConfig,
    sensor_ref: &SensorRef,
) -> f64 {
    let (dpi, _) = sample_path_adjoint_rgb(scene, pixel, rng, l_fwd, cfg, sensor_ref);
    dpi[0] * delta_l[0] + dpi[1] * delta_l[1] + dpi[2] * delta_l[2]
}

/// Forward-mode twin of the replay adjoint: a single dual-valued pass over
/// the identical estimator.
struct AdVisitor {
    beta: Spectrum,
    total: Spectrum,
    film: (f64, f64),
    geom: Option<SensorGeom>,
    ablate: bool,
}

impl ThreePointVisitor for AdVisitor {
    fn sensor(&mut self, tx: f64, ty: f64, geom: Option<&SensorGeom>) {
        self.film = (tx, ty);
        self.geom = geom.copied();
    }

    fn segment_det(&mut self, d: Dual) {
        let ratio = if self.ablate { Dual::ONE } else { d / d.detach() };
        self.beta = self.beta.scale(ratio);
    }

    fn emission(&mut self, term: Spectrum) {
        self.total = self.total + self.beta * term;
    }

    fn nee(&mut self, term: Spectrum) {
        self.total = self.total + self.beta * term;
    }

    fn bsdf(&mut self, f: Spectrum, pdf: f64) -> bool {
        self.beta = (self.beta * f).scale(Dual::constant(1.0 / pdf));
        self.beta.r.val > 0.0 || self.beta.g.val > 0.0 || self.beta.b.val > 0.0
    }
}

/// Single-pass forward-mode evaluation of the detached-position estimator.
/// The value equals [`sample_path_pixel`]; the derivative equals the replay
/// adjoint contracted with a unit δL in each channel.
pub fn ad_threepoint(
    scene: &Scene,
    pixel: (u32, u32),
    rng: &PathRng,
    cfg: &IntegratorConfig,
    sensor_ref: &SensorRef,
) -> Spectrum {
    let mut v = AdVisitor {
        beta: Spectrum::splat(1.0),
        total: Spectrum::ZERO,
        film: (0.0, 0.0),
        geom: None,
        ablate: cfg.disable_det_derivative,
    };
    walk_pixel(scene, Dual::var(scene.pi_init), pixel, rng, cfg, &mut v);
    let filter = PixelFilter::new(cfg.filter_radius);
    let s = sensor_contribution(
        &filter,
        v.film.0,
        v.film.1,
        v.geom.as_ref(),
        v.total.value(),
        sensor_ref,
        cfg.disable_det_derivative,
    );
    Spectrum::new(
        Dual::new(v.total.r.val, v.total.r.dpi + s[0]),
        Dual::new(v.total.g.val, v.total.g.dpi + s[1]),
        Dual::new(v.total.b.val, v.total.b.dpi + s[2]),
    )
}
