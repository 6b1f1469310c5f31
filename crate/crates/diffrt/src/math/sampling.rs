//! Sampling warps, MIS weighting, and the pixel reconstruction filter.

use std::f64::consts::PI;

use super::vec::Vec3;

/// Cosine-weighted hemisphere sample in the local frame (z = normal).
///
/// The returned direction is a plain value: the sample is detached by
/// construction. pdf is cosθ/π in solid angle.
#[inline]
pub fn cosine_hemisphere_sample(u1: f64, u2: f64) -> (Vec3, f64) {
    let r = u1.sqrt();
    let phi = 2.0 * PI * u2;
    let z = (1.0 - u1).max(0.0).sqrt();
    let dir = Vec3::new(r * phi.cos(), r * phi.sin(), z);
    (dir, z / PI)
}

/// Solid-angle pdf of [`cosine_hemisphere_sample`] for a direction with the
/// given cosine to the normal.
#[inline]
pub fn cosine_hemisphere_pdf(cos_theta: f64) -> f64 {
    cos_theta.max(0.0) / PI
}

/// Power heuristic with exponent 2. `None` when both densities vanish
/// (the sample carries no weight).
#[inline]
pub fn power_heuristic(pdf_a: f64, pdf_b: f64) -> Option<f64> {
    let a2 = pdf_a * pdf_a;
    let b2 = pdf_b * pdf_b;
    if a2 + b2 <= 0.0 {
        None
    } else {
        Some(a2 / (a2 + b2))
    }
}

/// Separable Hann (cos²) pixel reconstruction filter of the given radius,
/// normalized to integrate to one per axis.
///
/// Chosen over a tent because its relative slope W'/W has finite second
/// moment under the filter distribution, which keeps the attached filter
/// weight in the surface-form estimators at finite variance.
#[derive(Clone, Copy, Debug)]
pub struct PixelFilter {
    pub radius: f64,
}

impl PixelFilter {
    pub fn new(radius: f64) -> Self {
        assert!(radius > 0.0);
        PixelFilter { radius }
    }

    /// Normalized weight at offset t; zero outside [-radius, radius].
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t.abs() >= self.radius {
            return 0.0;
        }
        let c = (PI * t / (2.0 * self.radius)).cos();
        c * c / self.radius
    }

    /// W'(t)/W(t) inside the support.
    #[inline]
    pub fn log_deriv(&self, t: f64) -> f64 {
        -(PI / self.radius) * (PI * t / (2.0 * self.radius)).tan()
    }

    /// Inverse-CDF sample of the filter distribution; deterministic
    /// bisection so replay reproduces offsets bit-exactly.
    pub fn sample(&self, xi: f64) -> f64 {
        let r = self.radius;
        let mut lo = -r;
        let mut hi = r;
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            let cdf = 0.5 * (mid / r + 1.0) + (PI * mid / r).sin() / (2.0 * PI);
            if cdf < xi {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // keep strictly inside the support so W > 0
        (0.5 * (lo + hi)).clamp(-r + 1e-9, r - 1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::PathRng;

    #[test]
    fn cosine_sample_half_u_gives_sqrt_half_cosine() {
        // u = (0.5, 0.0): cosθ = sqrt(1 − 0.5)
        let (d, pdf) = cosine_hemisphere_sample(0.5, 0.0);
        assert!((d.z - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((d.length() - 1.0).abs() < 1e-12);
        assert!((pdf - d.z / PI).abs() < 1e-15);
    }

    #[test]
    fn cosine_pdf_integrates_to_one_over_hemisphere() {
        // MC quadrature with uniform hemisphere directions: E[pdf]·2π = 1
        let rng = PathRng::new(42, 0, 0);
        let n = 1_000_000u32;
        let mut acc = 0.0;
        for i in 0..n {
            let u1 = rng.draw(2 * i);
            let u2 = rng.draw(2 * i + 1);
            let z = u1; // uniform hemisphere: z ~ U[0,1)
            let _phi = 2.0 * PI * u2;
            acc += cosine_hemisphere_pdf(z);
        }
        let integral = acc / n as f64 * (2.0 * PI);
        assert!((integral - 1.0).abs() < 1e-3, "integral = {integral}");
    }

    #[test]
    fn power_heuristic_cases() {
        assert_eq!(power_heuristic(1.0, 0.0), Some(1.0));
        assert_eq!(power_heuristic(1.0, 1.0), Some(0.5));
        assert_eq!(power_heuristic(2.0, 1.0), Some(0.8));
        assert_eq!(power_heuristic(0.0, 0.0), None);
    }

    #[test]
    fn filter_normalization_and_identities() {
        let f = PixelFilter::new(2.5);
        // ∫W = 1, ∫W' = 0, ∫W'·t = −1 (trapezoid quadrature)
        let n = 200_000;
        let mut w_int = 0.0;
        let mut wp_int = 0.0;
        let mut wpt_int = 0.0;
        let h = 2.0 * f.radius / n as f64;
        for i in 0..n {
            let t = -f.radius + (i as f64 + 0.5) * h;
            let w = f.eval(t);
            let wp = f.log_deriv(t) * w;
            w_int += w * h;
            wp_int += wp * h;
            wpt_int += wp * t * h;
        }
        assert!((w_int - 1.0).abs() < 1e-6);
        assert!(wp_int.abs() < 1e-6);
        assert!((wpt_int + 1.0).abs() < 1e-5);
    }

    #[test]
    fn filter_sampling_matches_cdf() {
        let f = PixelFilter::new(1.0);
        // median at 0, quartiles symmetric
        let m = f.sample(0.5);
        assert!(m.abs() < 1e-9);
        let q = f.sample(0.25);
        // CDF(q) = 0.25
        let cdf = 0.5 * (q / 1.0 + 1.0) + (PI * q).sin() / (2.0 * PI);
        assert!((cdf - 0.25).abs() < 1e-9);
    }
}
