//! Materials, emitters, and textures with explicit attachment semantics.
//!
//! Every evaluation takes attached uv duals; derivative flow follows the
//! chain rule through whatever the caller attached. All discrete decisions
//! (sidedness, checker cells, grid texel indices) are made on values only,
//! so an attached evaluation never flips a branch relative to a value-only
//! one.

use crate::math::{Dual, DualVec3, Spectrum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TexAxis {
    U,
    V,
}

/// Spatially varying RGB source.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Texture {
    Constant { rgb: [f64; 3] },
    LinearGradient { axis: TexAxis, from: [f64; 3], to: [f64; 3] },
    Checker { a: [f64; 3], b: [f64; 3], tiles: u32 },
    Grid { width: u32, height: u32, data: Vec<[f64; 3]> },
}

impl Texture {
    pub fn validate(&self) -> Result<(), String> {
        let nonneg = |rgb: &[f64; 3]| rgb.iter().all(|v| *v >= 0.0 && v.is_finite());
        match self {
            Texture::Constant { rgb } => {
                if !nonneg(rgb) {
                    return Err("constant texture has negative channel".into());
                }
            }
            Texture::LinearGradient { from, to, .. } => {
                if !nonneg(from) || !nonneg(to) {
                    return Err("gradient endpoints must be nonnegative".into());
                }
            }
            Texture::Checker { a, b, tiles } => {
                if !nonneg(a) || !nonneg(b) {
                    return Err("checker colors must be nonnegative".into());
                }
                if *tiles == 0 {
                    return Err("checker tiles must be >= 1".into());
                }
            }
            Texture::Grid { width, height, data } => {
                if *width == 0 || *height == 0 {
                    return Err("grid dimensions must be >= 1".into());
                }
                if data.len() != (*width * *height) as usize {
                    return Err(format!(
                        "grid data length {} does not match {}x{}",
                        data.len(),
                        width,
                        height
                    ));
                }
                if !data.iter().all(nonneg) {
                    return Err("grid texels must be nonnegative".into());
                }
            }
        }
        Ok(())
    }

    pub fn max_channel(&self) -> f64 {
        let m3 = |rgb: &[f64; 3]| rgb[0].max(rgb[1]).max(rgb[2]);
        match self {
            Texture::Constant { rgb } => m3(rgb),
            Texture::LinearGradient { from, to, .. } => m3(from).max(m3(to)),
            Texture::Checker { a, b, .. } => m3(a).max(m3(b)),
            Texture::Grid { data, .. } => data.iter().map(m3).fold(0.0, f64::max),
        }
    }
}

/// Evaluate a texture with attached uv; uv values are clamped to [0,1].
pub fn eval_texture(tex: &Texture, uv: [Dual; 2]) -> Spectrum {
    let cl = |x: Dual| -> Dual {
        if x.val < 0.0 {
            Dual::ZERO
        } else if x.val > 1.0 {
            Dual::ONE
        } else {
            x
        }
    };
    let u = cl(uv[0]);
    let v = cl(uv[1]);
    match tex {
        Texture::Constant { rgb } => Spectrum::constant(*rgb),
        Texture::LinearGradient { axis, from, to } => {
            let t = match axis {
                TexAxis::U => u,
                TexAxis::V => v,
            };
            let lerp = |a: f64, b: f64| Dual::constant(a) + t * (b - a);
            Spectrum::new(lerp(from[0], to[0]), lerp(from[1], to[1]), lerp(from[2], to[2]))
        }
        Texture::Checker { a, b, tiles } => {
            // cell selection on values; piecewise constant inside a cell
            let n = *tiles as f64;
            let iu = ((u.val * n).floor() as i64).min(*tiles as i64 - 1);
            let iv = ((v.val * n).floor() as i64).min(*tiles as i64 - 1);
            if (iu + iv) % 2 == 0 {
                Spectrum::constant(*a)
            } else {
                Spectrum::constant(*b)
            }
        }
        Texture::Grid { width, height, data } => {
            // texel-center convention, bilinear; indices chosen on values
            let w = *width as i64;
            let h = *height as i64;
            let x = u * *width as f64 - 0.5;
            let y = v * *height as f64 - 0.5;
            let x0 = x.val.floor() as i64;
            let y0 = y.val.floor() as i64;
            let fx = x - x0 as f64;
            let fy = y - y0 as f64;
            let at = |xi: i64, yi: i64| -> [f64; 3] {
                let xi = xi.clamp(0, w - 1);
                let yi = yi.clamp(0, h - 1);
                data[(yi * w + xi) as usize]
            };
            let c00 = Spectrum::constant(at(x0, y0));
            let c10 = Spectrum::constant(at(x0 + 1, y0));
            let c01 = Spectrum::constant(at(x0, y0 + 1));
            let c11 = Spectrum::constant(at(x0 + 1, y0 + 1));
            let one = Dual::ONE;
            c00.scale((one - fx) * (one - fy))
                + c10.scale(fx * (one - fy))
                + c01.scale((one - fx) * fy)
                + c11.scale(fx * fy)
        }
    }
}

/// Lambertian surface.
#[derive(Clone, Debug)]
pub struct Bsdf {
    pub albedo: Texture,
}

impl Bsdf {
    pub fn diffuse(albedo: Texture) -> Bsdf {
        Bsdf { albedo }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.albedo.validate()?;
        if self.albedo.max_channel() > 1.0 {
            return Err("albedo exceeds 1 (energy conservation)".into());
        }
        Ok(())
    }
}

/// Diffuse BSDF with the foreshortening cosine at the receiving vertex:
/// albedo(uv)/π · max(0, n·wi). `nf` is the shading normal already oriented
/// toward the outgoing side (decided on values by the caller).
pub fn eval_bsdf(bsdf: &Bsdf, uv: [Dual; 2], nf: DualVec3, wi: DualVec3) -> Spectrum {
    let cos = nf.dot(wi).max0();
    eval_texture(&bsdf.albedo, uv).scale(cos / std::f64::consts::PI)
}

/// Area emitter.
#[derive(Clone, Debug)]
pub struct Emitter {
    pub radiance: Texture,
    pub two_sided: bool,
    /// When set, emitted radiance is π·texture (the scene parameter scales
    /// the emission instead of moving geometry).
    pub pi_scales_radiance: bool,
}

/// Emitted radiance toward a query direction. `cos_toward` is the value of
/// n_geo·toward and decides sidedness; uv and π may be attached.
pub fn eval_emitter(em: &Emitter, uv: [Dual; 2], cos_toward: f64, pi: Dual) -> Spectrum {
    if cos_toward <= 0.0 && !em.two_sided {
        return Spectrum::ZERO;
    }
    let tex = eval_texture(&em.radiance, uv);
    if em.pi_scales_radiance {
        tex.scale(pi)
    } else {
        tex
    }
}
