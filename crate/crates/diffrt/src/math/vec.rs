//! Plain and dual-valued 3-vectors.

use super::dual::Dual;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value-only vector in ℝ³.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    #[inline]
    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    #[inline]
    pub fn normalized(self) -> Vec3 {
        self / self.length()
    }

    #[inline]
    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        self * (1.0 / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Vector in ℝ³ whose components carry π-derivatives.
///
/// Houses the embedding S(𝐩, π) and directions between attached points.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DualVec3 {
    pub x: Dual,
    pub y: Dual,
    pub z: Dual,
}

impl DualVec3 {
    #[inline]
    pub fn new(x: Dual, y: Dual, z: Dual) -> Self {
        DualVec3 { x, y, z }
    }

    /// Lift a value-only vector to a constant dual vector.
    #[inline]
    pub fn constant(v: Vec3) -> Self {
        DualVec3 {
            x: Dual::constant(v.x),
            y: Dual::constant(v.y),
            z: Dual::constant(v.z),
        }
    }

    /// Value plus an explicit derivative direction.
    #[inline]
    pub fn with_derivative(v: Vec3, d: Vec3) -> Self {
        DualVec3 {
            x: Dual::new(v.x, d.x),
            y: Dual::new(v.y, d.y),
            z: Dual::new(v.z, d.z),
        }
    }

    #[inline]
    pub fn value(self) -> Vec3 {
        Vec3::new(self.x.val, self.y.val, self.z.val)
    }

    #[inline]
    pub fn derivative(self) -> Vec3 {
        Vec3::new(self.x.dpi, self.y.dpi, self.z.dpi)
    }

    #[inline]
    pub fn detach(self) -> Self {
        DualVec3::constant(self.value())
    }

    #[inline]
    pub fn dot(self, o: DualVec3) -> Dual {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: DualVec3) -> DualVec3 {
        DualVec3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    #[inline]
    pub fn length_squared(self) -> Dual {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> Dual {
        self.length_squared().sqrt()
    }

    #[inline]
    pub fn normalized(self) -> DualVec3 {
        let inv = self.length().recip();
        self * inv
    }

    #[inline]
    pub fn scale(self, s: f64) -> DualVec3 {
        DualVec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Add for DualVec3 {
    type Output = DualVec3;
    #[inline]
    fn add(self, o: DualVec3) -> DualVec3 {
        DualVec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for DualVec3 {
    type Output = DualVec3;
    #[inline]
    fn sub(self, o: DualVec3) -> DualVec3 {
        DualVec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<Dual> for DualVec3 {
    type Output = DualVec3;
    #[inline]
    fn mul(self, s: Dual) -> DualVec3 {
        DualVec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for DualVec3 {
    type Output = DualVec3;
    #[inline]
    fn neg(self) -> DualVec3 {
        DualVec3::new(-self.x, -self.y, -self.z)
    }
}

/// Orthonormal shading frame with dual-valued axes.
///
/// For rigid-translation bindings the axes are constant in π, but the frame
/// may carry derivatives in general; a detached local sample then picks up
/// π-dependence only through the frame.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub t: DualVec3,
    pub b: DualVec3,
    pub n: DualVec3,
}

impl Frame {
    /// Builds a frame around `n` (assumed unit length).
    pub fn from_normal(n: DualVec3) -> Frame {
        // branch on values only
        let nv = n.value();
        let a = if nv.x.abs() > 0.9 { Vec3::new(0.0, 1.0, 0.0) } else { Vec3::new(1.0, 0.0, 0.0) };
        let t = DualVec3::constant(a).cross(n).normalized();
        let b = n.cross(t);
        Frame { t, b, n }
    }

    /// Local (x, y, z) with z along the normal → world direction.
    #[inline]
    pub fn to_world(&self, local: Vec3) -> DualVec3 {
        self.t.scale(local.x) + self.b.scale(local.y) + self.n.scale(local.z)
    }
}
