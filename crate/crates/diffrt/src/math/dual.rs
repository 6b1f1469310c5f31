//! Forward-mode dual scalars for a single scene parameter.
//!
//! Every differentiable quantity in the renderer is a [`Dual`]: a value
//! paired with its derivative with respect to the one scene parameter π.
//! With a single independent variable, forward and reverse mode coincide,
//! so [`backward_grad`] is a plain product instead of a tape.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// A real value together with its derivative w.r.t. the scene parameter π.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual {
    pub val: f64,
    pub dpi: f64,
}

impl Dual {
    pub const ZERO: Dual = Dual { val: 0.0, dpi: 0.0 };
    pub const ONE: Dual = Dual { val: 1.0, dpi: 0.0 };

    #[inline]
    pub fn new(val: f64, dpi: f64) -> Self {
        Dual { val, dpi }
    }

    /// A constant: does not vary with π.
    #[inline]
    pub fn constant(val: f64) -> Self {
        Dual { val, dpi: 0.0 }
    }

    /// The independent variable itself (dπ/dπ = 1).
    #[inline]
    pub fn var(val: f64) -> Self {
        Dual { val, dpi: 1.0 }
    }

    /// Value preserved bit-exact, derivative zeroed.
    #[inline]
    pub fn detach(self) -> Self {
        Dual { val: self.val, dpi: 0.0 }
    }

    #[inline]
    pub fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        Dual { val: s, dpi: if s > 0.0 { self.dpi / (2.0 * s) } else { 0.0 } }
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.val < 0.0 {
            -self
        } else {
            self
        }
    }

    /// max(0, x); the clamp decision is made on the value.
    #[inline]
    pub fn max0(self) -> Self {
        if self.val > 0.0 {
            self
        } else {
            Dual::ZERO
        }
    }

    #[inline]
    pub fn recip(self) -> Self {
        let r = 1.0 / self.val;
        Dual { val: r, dpi: -self.dpi * r * r }
    }

    #[inline]
    pub fn sin(self) -> Self {
        Dual { val: self.val.sin(), dpi: self.dpi * self.val.cos() }
    }

    #[inline]
    pub fn cos(self) -> Self {
        Dual { val: self.val.cos(), dpi: -self.dpi * self.val.sin() }
    }

    #[inline]
    pub fn tan(self) -> Self {
        let c = self.val.cos();
        Dual { val: self.val.tan(), dpi: self.dpi / (c * c) }
    }

    #[inline]
    pub fn powi(self, n: i32) -> Self {
        let p = self.val.powi(n - 1);
        Dual { val: p * self.val, dpi: self.dpi * n as f64 * p }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.val.is_finite() && self.dpi.is_finite()
    }
}

/// Reverse-mode hook of the replay adjoint: accumulates (∂f/∂π)·adjoint.
///
/// Valid as reverse mode because there is exactly one independent variable.
#[inline]
pub fn backward_grad(f: Dual, adjoint: f64) -> f64 {
    f.dpi * adjoint
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: Dual) -> Dual {
        Dual { val: self.val + o.val, dpi: self.dpi + o.dpi }
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: Dual) -> Dual {
        Dual { val: self.val - o.val, dpi: self.dpi - o.dpi }
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        Dual { val: self.val * o.val, dpi: self.val * o.dpi + self.dpi * o.val }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: Dual) -> Dual {
        let inv = 1.0 / o.val;
        Dual {
            val: self.val * inv,
            dpi: (self.dpi - self.val * inv * o.dpi) * inv,
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual { val: -self.val, dpi: -self.dpi }
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: f64) -> Dual {
        Dual { val: self.val + o, dpi: self.dpi }
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: f64) -> Dual {
        Dual { val: self.val - o, dpi: self.dpi }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: f64) -> Dual {
        Dual { val: self.val * o, dpi: self.dpi * o }
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: f64) -> Dual {
        Dual { val: self.val / o, dpi: self.dpi / o }
    }
}

impl Mul<Dual> for f64 {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        o * self
    }
}
