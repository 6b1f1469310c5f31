//! Harness-level checks: oracle convergence, furnace transport, and the
//! comparison report plumbing.

use diffrt::experiments::{build_case_scene, rel_l1, run_comparison, CaseSetting, Variant};
use diffrt::integrator::{fd_gradient, IntegratorConfig, Method};
use diffrt::math::{cosine_hemisphere_sample, DualVec3, Frame, Vec3};
use diffrt::radiometry::{Bsdf, Emitter, Texture};
use diffrt::rng::PathRng;
use diffrt::scene::{Camera, Scene, Shape};

fn case(id: u8, variant: Variant) -> CaseSetting {
    CaseSetting { id, variant }
}

/// Truncation error of the oracle is under control: halving h changes the
/// FD image by well under 1% relative L1 on a continuous scene.
#[test]
fn fd_oracle_truncation_converged() {
    let scene = build_case_scene(case(1, Variant::Occluding), 24);
    let cfg = IntegratorConfig { spp: 64, seed: 5, ..Default::default() };
    let h = 1e-3 * scene.extent();
    let g1 = fd_gradient(&scene, h, &cfg).unwrap();
    let g2 = fd_gradient(&scene, h / 2.0, &cfg).unwrap();
    let rel = rel_l1(&g2, &g1, 0);
    assert!(rel < 0.01, "halving h changed the FD image by {rel:.4}");
}

/// Closed box of albedo-ρ walls: with cosine sampling the throughput after
/// k bounces is ρᵏ for every path, and no path escapes the box.
#[test]
fn white_furnace_throughput() {
    let rho = 0.7;
    let mk = |origin: [f64; 3], eu: [f64; 3], ev: [f64; 3]| Shape {
        origin: Vec3::new(origin[0], origin[1], origin[2]),
        edge_u: Vec3::new(eu[0], eu[1], eu[2]),
        edge_v: Vec3::new(ev[0], ev[1], ev[2]),
        binding: None,
        bsdf: 0,
        emitter: Some(0),
    };
    // cube [-1,1]^3; shading normals are face-forwarded, so edge order
    // does not matter here
    let shapes = vec![
        mk([-1.0, -1.0, -1.0], [0.0, 2.0, 0.0], [2.0, 0.0, 0.0]), // z = -1
        mk([-1.0, -1.0, 1.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]),  // z = +1
        mk([-1.0, -1.0, -1.0], [0.0, 0.0, 2.0], [0.0, 2.0, 0.0]), // x = -1
        mk([1.0, -1.0, -1.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]),  // x = +1
        mk([-1.0, -1.0, -1.0], [2.0, 0.0, 0.0], [0.0, 0.0, 2.0]), // y = -1
        mk([-1.0, 1.0, -1.0], [0.0, 0.0, 2.0], [2.0, 0.0, 0.0]),  // y = +1
    ];
    let cam = Camera::new(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 1.0, 0.0), 60.0, 4, 4);
    let scene = Scene::new(
        shapes,
        vec![Bsdf::diffuse(Texture::Constant { rgb: [rho; 3] })],
        vec![Emitter {
            radiance: Texture::Constant { rgb: [1.0; 3] },
            two_sided: true,
            pi_scales_radiance: false,
        }],
        cam,
        0.0,
    );

    let k = 5;
    let rng = PathRng::new(77, 0, 0);
    let mut dim = 0u32;
    let mut draw = || {
        dim += 1;
        rng.draw(dim)
    };
    for _path in 0..2000 {
        let mut origin = Vec3::new(0.0, 0.0, 0.0);
        let mut dir = {
            let (d, _) = cosine_hemisphere_sample(draw(), draw());
            Vec3::new(d.x, d.y, d.z).normalized()
        };
        let mut beta = 1.0f64;
        for bounce in 0..k {
            let hit = scene
                .intersect(origin, dir, 0.0)
                .unwrap_or_else(|| panic!("path escaped the closed box at bounce {bounce}"));
            let shape = &scene.shapes[hit.point.shape];
            let x = shape.point(hit.point.uv, 0.0);
            let n = shape.normal();
            let nf = if n.dot(-dir) >= 0.0 { n } else { -n };
            let (local, pdf) = cosine_hemisphere_sample(draw(), draw());
            let frame = Frame::from_normal(DualVec3::constant(nf));
            let wi = frame.to_world(local).value();
            // f/pdf = (ρ/π · cos) / (cos/π) = ρ exactly
            let f = rho / std::f64::consts::PI * nf.dot(wi).max(0.0);
            beta *= f / pdf;
            origin = x;
            dir = wi;
        }
        let expect = rho.powi(k as i32);
        assert!(
            (beta - expect).abs() < 1e-12,
            "throughput after {k} bounces: {beta} vs {expect}"
        );
    }
}

/// Comparison reports are reproducible bit-exact from the configuration.
#[test]
fn comparison_report_is_reproducible() {
    let setting = case(1, Variant::Occluding);
    let scene = build_case_scene(setting, 12);
    let cfg = IntegratorConfig { spp: 8, seed: 4, ..Default::default() };
    let methods = [Method::PrbThreepoint, Method::PrbClassic];
    let (r1, imgs1) = run_comparison(&scene, setting, &methods, &cfg, 16, 0).unwrap();
    let (r2, imgs2) = run_comparison(&scene, setting, &methods, &cfg, 16, 0).unwrap();
    for ((_, a), (_, b)) in imgs1.iter().zip(imgs2.iter()) {
        assert_eq!(a, b);
    }
    assert_eq!(r1.fd_l1_norm.to_bits(), r2.fd_l1_norm.to_bits());
    for (a, b) in r1.methods.iter().zip(r2.methods.iter()) {
        assert_eq!(a.rel_l1_vs_fd.to_bits(), b.rel_l1_vs_fd.to_bits());
        assert_eq!(a.grad_l1_norm.to_bits(), b.grad_l1_norm.to_bits());
        assert_eq!(a.mae.to_bits(), b.mae.to_bits());
    }
}

/// A 1×1 gradient image reduces to a scalar that matches a direct
/// path-level accumulation with the same streams.
#[test]
fn one_pixel_gradient_matches_path_level() {
    let scene = build_case_scene(case(1, Variant::Occluding), 1);
    let cfg = IntegratorConfig { spp: 32, seed: 6, ..Default::default() };
    let img = diffrt::integrator::render_gradient(&scene, Method::PrbThreepoint, &cfg).unwrap();
    let refs = diffrt::integrator::sensor_refs(&scene, &cfg);
    let mut acc = 0.0;
    for s in 0..cfg.spp {
        let rng = PathRng::new(cfg.seed, 0, s);
        let l = diffrt::integrator::sample_path_pixel(&scene, scene.pi_init, (0, 0), &rng, &cfg);
        let (dpi, _) = diffrt::integrator::threepoint::sample_path_adjoint_rgb(
            &scene,
            (0, 0),
            &rng,
            l,
            &cfg,
            &refs[0],
        );
        acc += dpi[0];
    }
    acc /= cfg.spp as f64;
    let got = img.at(0, 0)[0];
    assert!((got - acc).abs() <= 1e-12 * got.abs().max(1.0), "{got} vs {acc}");
}
