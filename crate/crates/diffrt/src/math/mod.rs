//! Differential scalar/vector arithmetic, sampling warps, and MIS weighting.

pub mod dual;
pub mod sampling;
pub mod spectrum;
pub mod vec;

pub use dual::{backward_grad, Dual};
pub use sampling::{cosine_hemisphere_pdf, cosine_hemisphere_sample, power_heuristic, PixelFilter};
pub use spectrum::Spectrum;
pub use vec::{DualVec3, Frame, Vec3};
