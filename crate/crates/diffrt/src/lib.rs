//! Differentiable path tracer for scenes whose geometry moves with a single
//! scalar parameter.
//!
//! The crate implements forward path tracing plus five gradient estimators:
//! path replay backpropagation in the surface (three-point) form, its
//! forward-mode twin, a forward-mode estimator in the spherical form, the
//! classic detached-direction replay baseline, and a common-random-number
//! finite-difference oracle.

pub mod cli;
pub mod experiments;
pub mod integrator;
pub mod io;
pub mod math;
pub mod radiometry;
pub mod rng;
pub mod scene;

pub use integrator::{fd_gradient, render_gradient, render_image, GradImage, IntegratorConfig, Method};
pub use math::{Dual, DualVec3, Spectrum, Vec3};
pub use scene::{ParamPoint, Scene};
