//! Classic detached-direction replay baseline.
//!
//! Each hit point is attached through the differentiated ray solve, so the
//! emission and BSDF evaluations pick up the motion of the surface under
//! the frozen ray (the uv slide and the local geometry factors). The ray
//! defining the next segment is detached from the intersection point, so
//! spatial variation of the incident radiance over a moving receiver is
//! lost — the bias this baseline is known for.

use crate::math::{
    backward_grad, cosine_hemisphere_sample, Dual, DualVec3, Frame, PixelFilter,
};
use crate::radiometry::{eval_bsdf, eval_emitter};
use crate::rng::PathRng;
use crate::scene::{ParamPoint, Scene};

use super::walk::{det_value, emission_mis_weight, film_offsets, nee_mis_weight, oriented_normal};
use super::IntegratorConfig;

/// Replay adjoint of the biased baseline. `l_fwd` is the forward value for
/// the identical rng key; returns ∂L/∂π per channel.
pub fn prb_classic_rgb(
    scene: &Scene,
    pixel: (u32, u32),
    rng: &PathRng,
    l_fwd: [f64; 3],
    cfg: &IntegratorConfig,
) -> [f64; 3] {
    let pi = Dual::var(scene.pi_init);
    let piv = pi.val;
    let filter = PixelFilter::new(cfg.filter_radius);
    let (tx, ty) = film_offsets(rng, &filter);
    let px = pixel.0 as f64 + 0.5 + tx;
    let py = pixel.1 as f64 + 0.5 + ty;
    let origin = scene.camera.position;
    let dir = scene.camera.ray_direction(px, py);

    let nee_count = cfg.nee_grid * cfg.nee_grid;
    let mut dpi = [0.0f64; 3];
    let mut l_rest = l_fwd;
    let mut beta = [1.0f64; 3];

    // first vertex: fixed ray, attached solve
    let Some(mut cur) =
        scene.intersect_attached(DualVec3::constant(origin), DualVec3::constant(dir), pi)
    else {
        return dpi;
    };
    let mut x_prev_val = origin;
    let mut prev_pdf_solid = 0.0;

    for bounce in 1..=cfg.max_depth {
        let shape = &scene.shapes[cur.shape];
        let x_c = cur.x;
        let wo = (DualVec3::constant(x_prev_val) - x_c).normalized();
        let nf = oriented_normal(scene, cur.shape, wo.value());
        let p_cur_val = ParamPoint { shape: cur.shape, uv: [cur.uv[0].val, cur.uv[1].val] };

        // emission at the attached hit (Term A)
        if let Some(em_id) = shape.emitter {
            let cos_e = shape.normal().dot(wo.value());
            let le = eval_emitter(&scene.emitters[em_id], cur.uv, cos_e, pi);
            if !le.is_black() {
                let w = if bounce == 1 {
                    1.0
                } else {
                    emission_mis_weight(scene, x_prev_val, prev_pdf_solid, p_cur_val, piv, nee_count)
                };
                for c in 0..3 {
                    let t = le.channel(c) * w;
                    dpi[c] += backward_grad(t, beta[c]);
                    l_rest[c] -= beta[c] * t.val;
                }
            }
        }

        if scene.bsdfs[shape.bsdf].albedo.max_channel() == 0.0 {
            break;
        }

        // next-event estimation with attached local geometry
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
                let x_l = scene.shapes[p_l.shape].point(p_l.uv, piv);
                let seg = x_l - x_c.value();
                let dist = seg.length();
                if dist < scene.ray_eps() {
                    continue;
                }
                let wi = seg / dist;
                let cos_l_toward = l_shape.normal().dot(-wi);
                let em = &scene.emitters[l_shape.emitter.expect("emitter shape")];
                let uv_l_dual = [Dual::constant(p_l.uv[0]), Dual::constant(p_l.uv[1])];
                let le = eval_emitter(em, uv_l_dual, cos_l_toward, pi);
                if le.is_black() {
                    continue;
                }
                // spatial terms only: the albedo slides with the attached
                // uv, while the direction, cosines, and geometry factor all
                // belong to the detached sample
                let f = eval_bsdf(&scene.bsdfs[shape.bsdf], cur.uv, nf, DualVec3::constant(wi));
                if f.is_black() {
                    continue;
                }
                if !scene.visibility(x_c.value(), x_l, piv) {
                    continue;
                }
                let d = det_value(scene, x_c.value(), p_l, piv);
                if d <= 0.0 {
                    continue;
                }
                let cos_receiver = nf.value().dot(wi);
                let w = nee_mis_weight(scene, cos_receiver, d, p_l, nee_count);
                let scale = w / (nee_count as f64 * pdf_param);
                let contrib = (f * le).scale(Dual::constant(d * scale));
                for c in 0..3 {
                    let t = contrib.channel(c);
                    dpi[c] += backward_grad(t, beta[c]);
                    l_rest[c] -= beta[c] * t.val;
                }
            }
        }

        if bounce == cfg.max_depth {
            break;
        }

        // BSDF derivative through the attached albedo uv; the continuation
        // ray is detached from the intersection point (Term B omitted)
        let u1 = rng.draw_at(bounce, 0);
        let u2 = rng.draw_at(bounce, 1);
        let (local, pdf) = cosine_hemisphere_sample(u1, u2);
        let frame = Frame::from_normal(nf);
        let wi_val = frame.to_world(local).value();
        let f = eval_bsdf(&scene.bsdfs[shape.bsdf], cur.uv, nf, DualVec3::constant(wi_val));
        for c in 0..3 {
            let fc = f.channel(c);
            if fc.val > 0.0 {
                dpi[c] += backward_grad(fc, l_rest[c] / fc.val);
            }
            beta[c] *= fc.val / pdf;
        }
        if !beta.iter().any(|&b| b > 0.0) {
            break;
        }

        let x_c_detached = DualVec3::constant(x_c.value());
        let Some(next) = scene.intersect_attached(x_c_detached, DualVec3::constant(wi_val), pi)
        else {
            break;
        };
        prev_pdf_solid = pdf;
        x_prev_val = x_c.value();
        cur = next;
    }
    dpi
}
