//! Counter-based random numbers keyed by (seed, pixel, sample, dimension).
//!
//! Every draw is addressed by an explicit dimension index instead of a
//! sequence position, so the adjoint replay and common-random-number finite
//! differences read the identical values no matter which draws a particular
//! code path skips.

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless per-path generator. Cloning or re-creating it with the same key
/// yields the same stream; `draw(dim)` is pure.
#[derive(Clone, Copy, Debug)]
pub struct PathRng {
    key: u64,
}

/// Dimension slots reserved per path bounce.
pub const DIMS_PER_BOUNCE: u32 = 32;

/// Film sample dimensions live in bounce 0.
pub const DIM_FILM_X: u32 = 0;
pub const DIM_FILM_Y: u32 = 1;

impl PathRng {
    pub fn new(seed: u64, pixel: u32, sample: u32) -> Self {
        let mut k = splitmix64(seed ^ 0x5851_F42D_4C95_7F2D);
        k = splitmix64(k ^ (pixel as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        k = splitmix64(k ^ (sample as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
        PathRng { key: k }
    }

    /// Uniform in [0, 1) at the given absolute dimension index.
    #[inline]
    pub fn draw(&self, dim: u32) -> f64 {
        let v = splitmix64(self.key ^ (dim as u64).wrapping_mul(0xA076_1D64_78BD_642F));
        (v >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Draw within a bounce's slot space. Bounce 0 is the camera.
    #[inline]
    pub fn draw_at(&self, bounce: u32, slot: u32) -> f64 {
        debug_assert!(slot < DIMS_PER_BOUNCE);
        self.draw(bounce * DIMS_PER_BOUNCE + slot)
    }
}

/// Derives a decorrelated seed stream (e.g. for reference prerenders).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}
