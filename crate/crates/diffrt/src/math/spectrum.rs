//! RGB radiance with per-channel π-derivatives.

use super::dual::Dual;
use std::ops::{Add, Mul, Sub};

/// Three-channel spectrum; each channel is a [`Dual`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Spectrum {
    pub r: Dual,
    pub g: Dual,
    pub b: Dual,
}

impl Spectrum {
    pub const ZERO: Spectrum = Spectrum { r: Dual::ZERO, g: Dual::ZERO, b: Dual::ZERO };

    #[inline]
    pub fn new(r: Dual, g: Dual, b: Dual) -> Self {
        Spectrum { r, g, b }
    }

    #[inline]
    pub fn constant(rgb: [f64; 3]) -> Self {
        Spectrum {
            r: Dual::constant(rgb[0]),
            g: Dual::constant(rgb[1]),
            b: Dual::constant(rgb[2]),
        }
    }

    #[inline]
    pub fn splat(v: f64) -> Self {
        Spectrum::constant([v, v, v])
    }

    #[inline]
    pub fn value(self) -> [f64; 3] {
        [self.r.val, self.g.val, self.b.val]
    }

    #[inline]
    pub fn dpi(self) -> [f64; 3] {
        [self.r.dpi, self.g.dpi, self.b.dpi]
    }

    #[inline]
    pub fn detach(self) -> Self {
        Spectrum { r: self.r.detach(), g: self.g.detach(), b: self.b.detach() }
    }

    #[inline]
    pub fn channel(self, c: usize) -> Dual {
        match c {
            0 => self.r,
            1 => self.g,
            _ => self.b,
        }
    }

    #[inline]
    pub fn max_value(self) -> f64 {
        self.r.val.max(self.g.val).max(self.b.val)
    }

    #[inline]
    pub fn is_black(self) -> bool {
        self.r.val == 0.0 && self.g.val == 0.0 && self.b.val == 0.0
    }

    /// Component-wise scale by a dual factor.
    #[inline]
    pub fn scale(self, s: Dual) -> Spectrum {
        Spectrum { r: self.r * s, g: self.g * s, b: self.b * s }
    }

    /// Component-wise scale by per-channel value weights.
    #[inline]
    pub fn scale_rgb(self, w: [f64; 3]) -> Spectrum {
        Spectrum { r: self.r * w[0], g: self.g * w[1], b: self.b * w[2] }
    }
}

impl Add for Spectrum {
    type Output = Spectrum;
    #[inline]
    fn add(self, o: Spectrum) -> Spectrum {
        Spectrum { r: self.r + o.r, g: self.g + o.g, b: self.b + o.b }
    }
}

impl Sub for Spectrum {
    type Output = Spectrum;
    #[inline]
    fn sub(self, o: Spectrum) -> Spectrum {
        Spectrum { r: self.r - o.r, g: self.g - o.g, b: self.b - o.b }
    }
}

impl Mul for Spectrum {
    type Output = Spectrum;
    #[inline]
    fn mul(self, o: Spectrum) -> Spectrum {
        Spectrum { r: self.r * o.r, g: self.g * o.g, b: self.b * o.b }
    }
}

impl Mul<f64> for Spectrum {
    type Output = Spectrum;
    #[inline]
    fn mul(self, s: f64) -> Spectrum {
        Spectrum { r: self.r * s, g: self.g * s, b: self.b * s }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detach_zeroes_all_channels() {
        let s = Spectrum::new(Dual::new(1.0, 2.0), Dual::new(0.5, -1.0), Dual::new(0.0, 3.0));
        let d = s.detach();
        assert_eq!(d.value(), s.value());
        assert_eq!(d.dpi(), [0.0; 3]);
    }

    #[test]
    fn componentwise_product_rule() {
        let a = Spectrum::new(Dual::var(2.0), Dual::constant(1.0), Dual::ZERO);
        let b = Spectrum::splat(3.0);
        let p = a * b;
        assert_eq!(p.r.val, 6.0);
        assert_eq!(p.r.dpi, 3.0);
        assert_eq!(p.g.dpi, 0.0);
    }
}
