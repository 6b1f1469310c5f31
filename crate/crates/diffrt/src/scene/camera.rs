//! Pinhole camera: ray generation, film projection, and the film Jacobian.

use crate::math::{Dual, DualVec3, Vec3};

/// Perspective pinhole camera. `fov_deg` is the vertical field of view;
/// film coordinates are pixels with y increasing downward.
#[derive(Clone, Debug)]
pub struct Camera {
    pub position: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    pub forward: Vec3,
    pub tan_half_x: f64,
    pub tan_half_y: f64,
    pub width: u32,
    pub height: u32,
}

impl Camera {
    pub fn new(position: Vec3, look_at: Vec3, up_hint: Vec3, fov_deg: f64, width: u32, height: u32) -> Self {
        let forward = (look_at - position).normalized();
        let right = forward.cross(up_hint).normalized();
        let up = right.cross(forward);
        let tan_half_y = (fov_deg.to_radians() / 2.0).tan();
        let tan_half_x = tan_half_y * width as f64 / height as f64;
        Camera { position, right, up, forward, tan_half_x, tan_half_y, width, height }
    }

    pub fn with_resolution(&self, width: u32, height: u32) -> Camera {
        let mut c = self.clone();
        c.width = width;
        c.height = height;
        c.tan_half_x = c.tan_half_y * width as f64 / height as f64;
        c
    }

    /// Unit ray direction through the film point (pixels).
    pub fn ray_direction(&self, px: f64, py: f64) -> Vec3 {
        let fx = 2.0 * px / self.width as f64 - 1.0;
        let fy = 1.0 - 2.0 * py / self.height as f64;
        (self.forward + self.right * (fx * self.tan_half_x) + self.up * (fy * self.tan_half_y))
            .normalized()
    }

    /// Projects an attached world point to film pixels. `None` if the point
    /// is at or behind the aperture plane (value test).
    pub fn film_project(&self, x: DualVec3) -> Option<[Dual; 2]> {
        let c = x - DualVec3::constant(self.position);
        let cf = c.dot(DualVec3::constant(self.forward));
        if cf.val <= 1e-9 {
            return None;
        }
        let cr = c.dot(DualVec3::constant(self.right));
        let cu = c.dot(DualVec3::constant(self.up));
        let fx = cr / (cf * self.tan_half_x);
        let fy = cu / (cf * self.tan_half_y);
        let px = (fx + 1.0) * (0.5 * self.width as f64);
        let py = (Dual::ONE - fy) * (0.5 * self.height as f64);
        Some([px, py])
    }

    /// |det ∂(px,py)/∂(u,v)| for a surface point with parametric tangents
    /// `edge_u`, `edge_v`, attached through the point's π-motion.
    ///
    /// This is the full film-area Jacobian of the parametrization; dividing
    /// by the reparameterization determinant D leaves the solid-angle→film
    /// factor.
    pub fn film_jacobian(&self, x: DualVec3, edge_u: Vec3, edge_v: Vec3) -> Dual {
        let c = x - DualVec3::constant(self.position);
        let cf = c.dot(DualVec3::constant(self.forward));
        let cr = c.dot(DualVec3::constant(self.right));
        let cu = c.dot(DualVec3::constant(self.up));
        let inv = (cf * cf).recip();
        let row = |e: Vec3| -> [Dual; 2] {
            let ef = Dual::constant(e.dot(self.forward));
            let er = Dual::constant(e.dot(self.right));
            let eu = Dual::constant(e.dot(self.up));
            let dfx = (er * cf - cr * ef) * inv / self.tan_half_x;
            let dfy = (eu * cf - cu * ef) * inv / self.tan_half_y;
            [
                dfx * (0.5 * self.width as f64),
                -dfy * (0.5 * self.height as f64),
            ]
        };
        let a = row(edge_u);
        let b = row(edge_v);
        (a[0] * b[1] - a[1] * b[0]).abs()
    }
}
