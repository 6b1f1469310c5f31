//! First-vertex sensor terms of the surface-form estimators.
//!
//! With detached position sampling, the camera segment contributes three
//! attached factors per sample: the pixel filter weight at the film position
//! of the moving first vertex, the film-area Jacobian of the parametrization
//! (split into a solid-angle part and the reparameterization determinant so
//! the determinant line can be ablated), and the determinant itself. Their
//! raw single-sample estimates are noisy because the filter's log-slope is
//! large; a per-pixel affine control variate built from the center ray's
//! plane model removes the predictable part and adds its expectation back in
//! closed form (E[W'/W] = 0 and E[(W'/W)·t] = −1 for any normalized
//! symmetric filter).

use crate::math::{Dual, PixelFilter, Vec3};
use crate::scene::{ParamPoint, Scene};

/// Log-derivative factors of the sensor terms for one first-vertex sample.
#[derive(Clone, Copy, Debug, Default)]
pub struct SensorGeom {
    /// Film velocity of the (frozen) first vertex, pixels per unit π.
    pub dtx: f64,
    pub dty: f64,
    /// d ln(J_film)/dπ where J_film = |det ∂film/∂(u,v)| / D.
    pub g_jfilm: f64,
    /// d ln(D)/dπ of the camera segment's reparameterization determinant.
    pub g_det: f64,
}

impl SensorGeom {
    /// Factors for an actual surface point (frozen uv, attached π).
    pub fn at(scene: &Scene, p: ParamPoint, pi: Dual) -> SensorGeom {
        let shape = &scene.shapes[p.shape];
        let x = scene.to_ambient(p, pi);
        let Some(film) = scene.camera.film_project(x) else {
            return SensorGeom::default();
        };
        let jac = scene.camera.film_jacobian(x, shape.edge_u, shape.edge_v);
        let det = scene.reparam_det_from(
            crate::math::DualVec3::constant(scene.camera.position),
            p,
            pi,
            true,
        );
        let (g_total, g_det) = match det {
            Ok(d) if d.val > 0.0 && jac.val > 0.0 => (jac.dpi / jac.val, d.dpi / d.val),
            _ => (0.0, 0.0),
        };
        SensorGeom {
            dtx: film[0].dpi,
            dty: film[1].dpi,
            g_jfilm: g_total - g_det,
            g_det,
        }
    }
}

/// Indices into the per-pixel affine model: film velocities, Jacobian
/// log-derivative, determinant log-derivative.
const C_VX: usize = 0;
const C_VY: usize = 1;
const C_JF: usize = 2;
const C_DET: usize = 3;

/// Per-pixel reference data for the sensor control variate.
#[derive(Clone, Copy, Debug, Default)]
pub struct SensorRef {
    pub valid: bool,
    a: [f64; 4],
    bx: [f64; 4],
    by: [f64; 4],
    lref: [f64; 3],
}

impl SensorRef {
    /// Builds the affine plane model from the pixel's center ray. `lref` is
    /// the pixel's (independently estimated) mean radiance.
    pub fn build(scene: &Scene, pixel: (u32, u32), lref: [f64; 3]) -> SensorRef {
        let cx = pixel.0 as f64 + 0.5;
        let cy = pixel.1 as f64 + 0.5;
        let piv = scene.pi_init;
        let dir = scene.camera.ray_direction(cx, cy);
        let Some(hit) = scene.intersect(scene.camera.position, dir, piv) else {
            return SensorRef::default();
        };
        let shape_idx = hit.point.shape;
        if scene.shapes[shape_idx].motion() == Vec3::ZERO {
            // static plane: all factors vanish identically
            return SensorRef { valid: true, a: [0.0; 4], bx: [0.0; 4], by: [0.0; 4], lref };
        }

        let eval = |ox: f64, oy: f64| -> Option<[f64; 4]> {
            let d = scene.camera.ray_direction(cx + ox, cy + oy);
            let (_, uv) = plane_hit(scene, shape_idx, scene.camera.position, d, piv)?;
            let g = SensorGeom::at(scene, ParamPoint { shape: shape_idx, uv }, Dual::var(piv));
            Some([g.dtx, g.dty, g.g_jfilm, g.g_det])
        };

        let delta = 0.35;
        let (Some(c0), Some(cxp), Some(cxm), Some(cyp), Some(cym)) = (
            eval(0.0, 0.0),
            eval(delta, 0.0),
            eval(-delta, 0.0),
            eval(0.0, delta),
            eval(0.0, -delta),
        ) else {
            return SensorRef::default();
        };

        let mut a = [0.0; 4];
        let mut bx = [0.0; 4];
        let mut by = [0.0; 4];
        for i in 0..4 {
            a[i] = c0[i];
            bx[i] = (cxp[i] - cxm[i]) / (2.0 * delta);
            by[i] = (cyp[i] - cym[i]) / (2.0 * delta);
        }
        SensorRef { valid: true, a, bx, by, lref }
    }

    #[inline]
    fn pred(&self, i: usize, tx: f64, ty: f64) -> f64 {
        self.a[i] + self.bx[i] * tx + self.by[i] * ty
    }
}

/// Unclamped intersection with the infinite plane carrying a shape.
fn plane_hit(
    scene: &Scene,
    shape_idx: usize,
    origin: Vec3,
    dir: Vec3,
    pi: f64,
) -> Option<(f64, [f64; 2])> {
    let shape = &scene.shapes[shape_idx];
    let o = shape.point([0.0, 0.0], pi);
    let n = shape.edge_u.cross(shape.edge_v);
    let denom = dir.dot(n);
    if denom.abs() < 1e-12 {
        return None;
    }
    let t = (o - origin).dot(n) / denom;
    if t <= 0.0 {
        return None;
    }
    let d = origin + dir * t - o;
    let (uu, uvv, vv) = (
        shape.edge_u.dot(shape.edge_u),
        shape.edge_u.dot(shape.edge_v),
        shape.edge_v.dot(shape.edge_v),
    );
    let det = uu * vv - uvv * uvv;
    let du = d.dot(shape.edge_u);
    let dv = d.dot(shape.edge_v);
    Some((t, [(du * vv - dv * uvv) / det, (dv * uu - du * uvv) / det]))
}

/// Per-sample sensor contribution to ∂L/∂π, one entry per channel.
///
/// `geom` is `None` when the camera ray missed; the control-variate pieces
/// still apply (they are a zero-mean addition in the film offsets alone).
/// With `ablate_det` the determinant line and its variate are dropped
/// entirely.
pub fn sensor_contribution(
    filter: &PixelFilter,
    tx: f64,
    ty: f64,
    geom: Option<&SensorGeom>,
    l: [f64; 3],
    r: &SensorRef,
    ablate_det: bool,
) -> [f64; 3] {
    let lwx = filter.log_deriv(tx);
    let lwy = filter.log_deriv(ty);
    let g = geom.copied().unwrap_or_default();
    let (pvx, pvy, pjf, pdet, addback) = if r.valid {
        (
            r.pred(C_VX, tx, ty),
            r.pred(C_VY, tx, ty),
            r.pred(C_JF, tx, ty),
            r.pred(C_DET, tx, ty),
            // E[lwx·pred_vx] = −bx_vx, E[lwy·pred_vy] = −by_vy,
            // E[pred_jf] = a_jf, E[pred_det] = a_det
            -r.bx[C_VX] - r.by[C_VY]
                + r.a[C_JF]
                + if ablate_det { 0.0 } else { r.a[C_DET] },
        )
    } else {
        (0.0, 0.0, 0.0, 0.0, 0.0)
    };
    let mut out = [0.0; 3];
    for c in 0..3 {
        let lc = l[c];
        let lr = r.lref[c];
        let mut acc = lwx * (g.dtx * lc - pvx * lr) + lwy * (g.dty * lc - pvy * lr);
        acc += g.g_jfilm * lc - pjf * lr;
        if !ablate_det {
            acc += g.g_det * lc - pdet * lr;
        }
        acc += addback * lr;
        out[c] = acc;
    }
    out
}
