//! Shared path skeleton for the surface-form estimators.
//!
//! One walker produces every per-vertex quantity as duals of π; the forward
//! renderer consumes it with a constant π, the replay adjoint and its
//! forward-mode twin with an attached π. All sampling decisions (shape
//! selection, sidedness, termination, MIS weights) are made on values, so
//! the three consumers traverse the identical path skeleton and see
//! bit-identical contribution values.

use crate::math::{
    cosine_hemisphere_pdf, cosine_hemisphere_sample, power_heuristic, Dual, DualVec3, Frame,
    PixelFilter, Spectrum, Vec3,
};
use crate::radiometry::{eval_bsdf, eval_emitter};
use crate::rng::{PathRng, DIM_FILM_X, DIM_FILM_Y};
use crate::scene::{ParamPoint, Scene};

use super::sensor::SensorGeom;
use super::IntegratorConfig;

/// Previous path vertex: a fixed ambient point (camera/aperture) or a
/// surface point in the parametrization.
#[derive(Clone, Copy, Debug)]
pub enum PrevVertex {
    Fixed(Vec3),
    Point(ParamPoint),
}

/// Receives the per-vertex terms of the surface-form walk, in replay order:
/// `segment_det` (arriving segment, bounce ≥ 2), `emission`, `nee`×K, then
/// `bsdf`. All spectra exclude the running throughput β, which each
/// consumer tracks itself from the `bsdf` events.
pub trait ThreePointVisitor {
    /// Film offsets and first-vertex sensor geometry (`None` on miss).
    fn sensor(&mut self, tx: f64, ty: f64, geom: Option<&SensorGeom>);
    /// New current vertex (replay-state bookkeeping hook).
    fn vertex_begin(&mut self, _bounce: u32, _p_prev: PrevVertex, _p_cur: ParamPoint) {}
    /// Reparameterization determinant of the segment arriving at the
    /// current vertex (not emitted for the camera segment).
    fn segment_det(&mut self, d: Dual);
    /// MIS-weighted emitted radiance at the current vertex: w·Le.
    fn emission(&mut self, term: Spectrum);
    /// One next-event contribution: f·Le·D·w / (K·pdf_param).
    fn nee(&mut self, term: Spectrum);
    /// BSDF factor toward the next vertex with its (detached) solid-angle
    /// pdf. Return false to terminate (throughput dead).
    fn bsdf(&mut self, f: Spectrum, pdf: f64) -> bool;
}

/// Shading normal oriented toward the outgoing side; the flip is decided
/// on values.
pub(crate) fn oriented_normal(scene: &Scene, shape: usize, wo_value: Vec3) -> DualVec3 {
    let n = scene.shapes[shape].normal_dual();
    if n.value().dot(wo_value) >= 0.0 {
        n
    } else {
        -n
    }
}

/// Value-only reparameterization determinant used inside detached pdfs and
/// MIS weights (never differentiated).
pub(crate) fn det_value(scene: &Scene, x_from: Vec3, p: ParamPoint, pi: f64) -> f64 {
    let shape = &scene.shapes[p.shape];
    let x = shape.point(p.uv, pi);
    let seg = x_from - x;
    let dist2 = seg.length_squared();
    if dist2.sqrt() < scene.ray_eps() {
        return 0.0;
    }
    let dist = dist2.sqrt();
    shape.normal().dot(seg).abs() / dist / dist2 * shape.cross_len()
}

/// MIS weight for emission picked up by the BSDF route at bounce ≥ 2.
pub(crate) fn emission_mis_weight(
    scene: &Scene,
    x_prev: Vec3,
    prev_pdf_solid: f64,
    p_cur: ParamPoint,
    pi: f64,
    nee_count: u32,
) -> f64 {
    let pdf_bsdf_param = prev_pdf_solid * det_value(scene, x_prev, p_cur, pi);
    let pdf_nee_param = nee_count as f64 * scene.pdf_emitter_param(p_cur.shape);
    power_heuristic(pdf_bsdf_param, pdf_nee_param).unwrap_or(0.0)
}

/// MIS weight for a next-event sample.
pub(crate) fn nee_mis_weight(
    scene: &Scene,
    cos_receiver: f64,
    d_value: f64,
    p_light: ParamPoint,
    nee_count: u32,
) -> f64 {
    let pdf_nee_param = nee_count as f64 * scene.pdf_emitter_param(p_light.shape);
    let pdf_bsdf_param = cosine_hemisphere_pdf(cos_receiver) * d_value;
    power_heuristic(pdf_nee_param, pdf_bsdf_param).unwrap_or(0.0)
}

/// Per-bounce rng slot layout: 0,1 BSDF; then 3 slots per stratified
/// next-event sample.
const SLOT_BSDF_U: u32 = 0;
const SLOT_BSDF_V: u32 = 1;
const SLOT_NEE_BASE: u32 = 2;

fn nee_slots(k: u32) -> (u32, u32, u32) {
    let b = SLOT_NEE_BASE + 3 * k;
    (b, b + 1, b + 2)
}

/// Draws the film offsets for a pixel sample (shared by every method and
/// by common-random-number finite differences).
pub(crate) fn film_offsets(rng: &PathRng, filter: &PixelFilter) -> (f64, f64) {
    let tx = filter.sample(rng.draw_at(0, DIM_FILM_X));
    let ty = filter.sample(rng.draw_at(0, DIM_FILM_Y));
    (tx, ty)
}

/// Surface-form walk from the camera through a pixel.
pub(crate) fn walk_pixel<V: ThreePointVisitor>(
    scene: &Scene,
    pi: Dual,
    pixel: (u32, u32),
    rng: &PathRng,
    cfg: &IntegratorConfig,
    visitor: &mut V,
) {
    let filter = PixelFilter::new(cfg.filter_radius);
    let (tx, ty) = film_offsets(rng, &filter);
    let px = pixel.0 as f64 + 0.5 + tx;
    let py = pixel.1 as f64 + 0.5 + ty;
    let origin = scene.camera.position;
    let dir = scene.camera.ray_direction(px, py);

    match scene.intersect(origin, dir, pi.val) {
        None => visitor.sensor(tx, ty, None),
        Some(hit) => {
            let geom = if pi.dpi != 0.0 {
                Some(SensorGeom::at(scene, hit.point, pi))
            } else {
                None
            };
            visitor.sensor(tx, ty, geom.as_ref());
            walk_core(scene, pi, PrevVertex::Fixed(origin), hit.point, rng, cfg, visitor);
        }
    }
}

/// Surface-form walk from an arbitrary ray (no sensor terms).
pub(crate) fn walk_ray<V: ThreePointVisitor>(
    scene: &Scene,
    pi: Dual,
    origin: Vec3,
    dir: Vec3,
    rng: &PathRng,
    cfg: &IntegratorConfig,
    visitor: &mut V,
) {
    if let Some(hit) = scene.intersect(origin, dir, pi.val) {
        walk_core(scene, pi, PrevVertex::Fixed(origin), hit.point, rng, cfg, visitor);
    }
}

fn walk_core<V: ThreePointVisitor>(
    scene: &Scene,
    pi: Dual,
    first_prev: PrevVertex,
    first_hit: ParamPoint,
    rng: &PathRng,
    cfg: &IntegratorConfig,
    visitor: &mut V,
) {
    let piv = pi.val;
    let nee_count = cfg.nee_grid * cfg.nee_grid;
    let mut p_prev = first_prev;
    let mut p_cur = first_hit;
    let mut prev_pdf_solid = 0.0;

    for bounce in 1..=cfg.max_depth {
        visitor.vertex_begin(bounce, p_prev, p_cur);
        let shape = &scene.shapes[p_cur.shape];
        let uv = [Dual::constant(p_cur.uv[0]), Dual::constant(p_cur.uv[1])];
        let x_c = scene.to_ambient(p_cur, pi);
        let x_p = match p_prev {
            PrevVertex::Fixed(v) => DualVec3::constant(v),
            PrevVertex::Point(p) => scene.to_ambient(p, pi),
        };
        let x_p_val = x_p.value();
        let wo = (x_p - x_c).normalized();
        let nf = oriented_normal(scene, p_cur.shape, wo.value());

        // determinant of the arriving segment; the camera segment's
        // determinant is part of the sensor terms
        if bounce >= 2 {
            if let Ok(d) = scene.reparam_det_from(x_p, p_cur, pi, true) {
                if d.val > 0.0 {
                    visitor.segment_det(d);
                }
            }
        }

        // emission at the current vertex
        let mut em = Spectrum::ZERO;
        if let Some(em_id) = shape.emitter {
            let cos_e = shape.normal().dot(wo.value());
            let le = eval_emitter(&scene.emitters[em_id], uv, cos_e, pi);
            if !le.is_black() {
                let w = if bounce == 1 {
                    1.0
                } else {
                    emission_mis_weight(scene, x_p_val, prev_pdf_solid, p_cur, piv, nee_count)
                };
                em = le.scale(Dual::constant(w));
            }
        }
        visitor.emission(em);

        // a non-reflective vertex ends the path: every scattered term is zero
        if scene.bsdfs[shape.bsdf].albedo.max_channel() == 0.0 {
            break;
        }

        // next-event estimation (depth allows one more segment)
        if bounce + 1 <= cfg.max_depth && !scene.emitter_shapes().is_empty() {
            let grid = cfg.nee_grid;
            for k in 0..nee_count {
                let (s_sel, s_u, s_v) = nee_slots(k);
                let u_sel = rng.draw_at(bounce, s_sel);
                let gx = (k % grid) as f64;
                let gy = (k / grid) as f64;
                let uv_l = [
                    (gx + rng.draw_at(bounce, s_u)) / grid as f64,
                    (gy + rng.draw_at(bounce, s_v)) / grid as f64,
                ];
                let term = nee_term(
                    scene, pi, p_cur, &uv, x_c, nf, u_sel, uv_l, nee_count,
                );
                visitor.nee(term);
            }
        }

        if bounce == cfg.max_depth {
            break;
        }

        // BSDF continuation; the next vertex is a detached surface point
        let u1 = rng.draw_at(bounce, SLOT_BSDF_U);
        let u2 = rng.draw_at(bounce, SLOT_BSDF_V);
        let (local, pdf) = cosine_hemisphere_sample(u1, u2);
        let frame = Frame::from_normal(nf);
        let wi_sampled = frame.to_world(local).value();
        let Some(next) = scene.intersect(x_c.value(), wi_sampled, piv) else {
            break;
        };
        let x_n = scene.to_ambient(next.point, pi);
        let wi = (x_n - x_c).normalized();
        let f = eval_bsdf(&scene.bsdfs[shape.bsdf], uv, nf, wi);
        if !visitor.bsdf(f, pdf) {
            break;
        }

        prev_pdf_solid = pdf;
        p_prev = PrevVertex::Point(p_cur);
        p_cur = next.point;
    }
}

/// One next-event contribution (β excluded): f·Le·D·w / (K·pdf_param).
#[allow(clippy::too_many_arguments)]
fn nee_term(
    scene: &Scene,
    pi: Dual,
    p_cur: ParamPoint,
    uv_cur: &[Dual; 2],
    x_c: DualVec3,
    nf: DualVec3,
    u_sel: f64,
    uv_l: [f64; 2],
    nee_count: u32,
) -> Spectrum {
    let piv = pi.val;
    let Some((p_l, pdf_param)) = scene.sample_emitter(u_sel, uv_l) else {
        return Spectrum::ZERO;
    };
    if pdf_param <= 0.0 {
        return Spectrum::ZERO;
    }
    let l_shape = &scene.shapes[p_l.shape];
    let x_l = scene.to_ambient(p_l, pi);
    let seg = x_l - x_c;
    let dist = seg.length();
    if dist.val < scene.ray_eps() {
        return Spectrum::ZERO;
    }
    let wi = seg * dist.recip();
    let cos_l_toward = l_shape.normal().dot(-wi.value());
    let em = &scene.emitters[l_shape.emitter.expect("emitter shape")];
    let uv_l_dual = [Dual::constant(p_l.uv[0]), Dual::constant(p_l.uv[1])];
    let le = eval_emitter(em, uv_l_dual, cos_l_toward, pi);
    if le.is_black() {
        return Spectrum::ZERO;
    }
    let f = eval_bsdf(&scene.bsdfs[scene.shapes[p_cur.shape].bsdf], *uv_cur, nf, wi);
    if f.is_black() {
        return Spectrum::ZERO;
    }
    if !scene.visibility(x_c.value(), x_l.value(), piv) {
        return Spectrum::ZERO;
    }
    let Ok(d) = scene.reparam_det_from(x_c, p_l, pi, true) else {
        return Spectrum::ZERO;
    };
    if d.val <= 0.0 {
        return Spectrum::ZERO;
    }
    let cos_receiver = nf.value().dot(wi.value());
    let w = nee_mis_weight(scene, cos_receiver, d.val, p_l, nee_count);
    let scale = w / (nee_count as f64 * pdf_param);
    ((f * le).scale(d)).scale(Dual::constant(scale))
}
