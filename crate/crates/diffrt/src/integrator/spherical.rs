//! Forward-mode estimator in the spherical form with detached direction
//! sampling.
//!
//! Directions are frozen at π₀; every intersection is computed with the
//! attached solve, so the motion of a vertex propagates to all later ones
//! through the moving ray origins. The film sample is fixed, which makes
//! the per-ray derivative exact without sensor terms, but radiance that is
//! discontinuous in the direction domain (geometry sliding across an
//! emitter edge) is differentiated past, which is this estimator's known
//! bias on such scenes.

use crate::math::{
    cosine_hemisphere_sample, Dual, DualVec3, Frame, PixelFilter, Spectrum,
};
use crate::radiometry::{eval_bsdf, eval_emitter};
use crate::rng::PathRng;
use crate::scene::{ParamPoint, Scene};

use super::walk::{emission_mis_weight, film_offsets, nee_mis_weight, oriented_normal};
use super::IntegratorConfig;

/// Dual-valued radiance of one pixel sample, spherical-form attachment.
pub fn ad_spherical(
    scene: &Scene,
    pixel: (u32, u32),
    rng: &PathRng,
    cfg: &IntegratorConfig,
) -> Spectrum {
    let pi = Dual::var(scene.pi_init);
    let piv = pi.val;
    let filter = PixelFilter::new(cfg.filter_radius);
    let (tx, ty) = film_offsets(rng, &filter);
    let px = pixel.0 as f64 + 0.5 + tx;
    let py = pixel.1 as f64 + 0.5 + ty;
    let origin = scene.camera.position;
    let dir = scene.camera.ray_direction(px, py);

    let nee_count = cfg.nee_grid * cfg.nee_grid;
    let mut total = Spectrum::ZERO;
    let mut beta = Spectrum::splat(1.0);

    let Some(mut cur) =
        scene.intersect_attached(DualVec3::constant(origin), DualVec3::constant(dir), pi)
    else {
        return total;
    };
    let mut x_prev = DualVec3::constant(origin);
    let mut prev_pdf_solid = 0.0;

    for bounce in 1..=cfg.max_depth {
        let shape = &scene.shapes[cur.shape];
        let x_c = cur.x;
        let wo = (x_prev - x_c).normalized();
        let nf = oriented_normal(scene, cur.shape, wo.value());
        let p_cur_val = ParamPoint { shape: cur.shape, uv: [cur.uv[0].val, cur.uv[1].val] };

        // emission with attached uv (Term A flows through the sliding hit)
        if let Some(em_id) = shape.emitter {
            let cos_e = shape.normal().dot(wo.value());
            let le = eval_emitter(&scene.emitters[em_id], cur.uv, cos_e, pi);
            if !le.is_black() {
                let w = if bounce == 1 {
                    1.0
                } else {
                    emission_mis_weight(scene, x_prev.value(), prev_pdf_solid, p_cur_val, piv, nee_count)
                };
                total = total + (beta * le).scale(Dual::constant(w));
            }
        }

        if scene.bsdfs[shape.bsdf].albedo.max_channel() == 0.0 {
            break;
        }

        // next-event estimation with attached receiver geometry
        if bounce + 1 <= cfg.max_depth && !scene.emitter_shapes().is_empty() {
            let grid = cfg.nee_grid;
            for k in 0..nee_count {
                let base = 2 + 3 * k;
                let u_sel = rng.draw_at(bounce, base);
                let gx = (k % grid) as f64;
                let gy = (k / grid) as f64;
                let uv_l = [
                    (gx + rng.draw_at(bounce, base + 1)) / grid as f64,
                    (gy + rng.draw_at(bounce, base + 2)) / grid as f64,
                ];
                let Some((p_l, pdf_param)) = scene.sample_emitter(u_sel, uv_l) else {
                    continue;
                };
                if pdf_param <= 0.0 {
                    continue;
                }
                let l_shape = &scene.shapes[p_l.shape];
                let x_l = scene.to_ambient(p_l, pi);
                let seg = x_l - x_c;
                let dist = seg.length();
                if dist.val < scene.ray_eps() {
                    continue;
                }
                let wi = seg * dist.recip();
                let cos_l_toward = l_shape.normal().dot(-wi.value());
                let em = &scene.emitters[l_shape.emitter.expect("emitter shape")];
                let uv_l_dual = [Dual::constant(p_l.uv[0]), Dual::constant(p_l.uv[1])];
                let le = eval_emitter(em, uv_l_dual, cos_l_toward, pi);
                if le.is_black() {
                    continue;
                }
                let f = eval_bsdf(&scene.bsdfs[shape.bsdf], cur.uv, nf, wi);
                if f.is_black() {
                    continue;
                }
                if !scene.visibility(x_c.value(), x_l.value(), piv) {
                    continue;
                }
                let Ok(d) = scene.reparam_det_from(x_c, p_l, pi, true) else {
                    continue;
                };
                if d.val <= 0.0 {
                    continue;
                }
                let cos_receiver = nf.value().dot(wi.value());
                let w = nee_mis_weight(scene, cos_receiver, d.val, p_l, nee_count);
                let scale = w / (nee_count as f64 * pdf_param);
                total = total + (beta * ((f * le).scale(d))).scale(Dual::constant(scale));
            }
        }

        if bounce == cfg.max_depth {
            break;
        }

        // detached direction; attached recursion through the moving origin
        let u1 = rng.draw_at(bounce, 0);
        let u2 = rng.draw_at(bounce, 1);
        let (local, pdf) = cosine_hemisphere_sample(u1, u2);
        let frame = Frame::from_normal(nf);
        let wi_val = frame.to_world(local).value();
        let wi = DualVec3::constant(wi_val);
        let Some(next) = scene.intersect_attached(x_c, wi, pi) else {
            break;
        };
        let f = eval_bsdf(&scene.bsdfs[shape.bsdf], cur.uv, nf, wi);
        beta = (beta * f).scale(Dual::constant(1.0 / pdf));
        if beta.max_value() <= 0.0 {
            break;
        }
        prev_pdf_solid = pdf;
        x_prev = x_c;
        cur = next;
    }
    total
}
