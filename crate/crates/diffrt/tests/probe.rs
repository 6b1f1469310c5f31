//! Scratch probe for acceptance magnitudes (removed before ship).

use diffrt::experiments::*;
use diffrt::integrator::*;

fn case(id: u8, variant: Variant) -> CaseSetting {
    CaseSetting { id, variant }
}

#[test]
#[ignore]
fn probe_criteria() {
    let t0 = std::time::Instant::now();
    // criterion 1: setting 3 occluding at 64, methods 1024, fd 4096
    let scene = build_case_scene(case(3, Variant::Occluding), 64);
    let cfg = IntegratorConfig { spp: 1024, seed: 11, ..Default::default() };
    let fd_cfg = IntegratorConfig { spp: 4096, ..cfg.clone() };
    let fd = render_gradient(&scene, Method::Fd, &fd_cfg).unwrap();
    println!("fd done {:?}", t0.elapsed());
    for m in [Method::PrbThreepoint, Method::AdSpherical, Method::PrbClassic] {
        let t1 = std::time::Instant::now();
        let g = render_gradient(&scene, m, &cfg).unwrap();
        println!(
            "S3occ {}: relL1={:.4} L1={:.3} (fd L1={:.3}) n/fd={:.4}  [{:?}]",
            m.name(),
            rel_l1(&g, &fd, 0),
            g.l1_norm(0),
            fd.l1_norm(0),
            g.l1_norm(0) / fd.l1_norm(0),
            t1.elapsed()
        );
    }
    println!("total {:?}", t0.elapsed());
}

#[test]
#[ignore]
fn probe_setting1_ablation() {
    let scene = build_case_scene(case(1, Variant::Occluding), 64);
    let cfg = IntegratorConfig { spp: 1024, seed: 11, ..Default::default() };
    let fd_cfg = IntegratorConfig { spp: 4096, ..cfg.clone() };
    let fd = render_gradient(&scene, Method::Fd, &fd_cfg).unwrap();
    let full = render_gradient(&scene, Method::PrbThreepoint, &cfg).unwrap();
    let ab_cfg = IntegratorConfig { disable_det_derivative: true, ..cfg.clone() };
    let ablated = render_gradient(&scene, Method::PrbThreepoint, &ab_cfg).unwrap();
    println!(
        "S1occ full relL1={:.4} ablated relL1={:.4}",
        rel_l1(&full, &fd, 0),
        rel_l1(&ablated, &fd, 0)
    );
    for m in [Method::PrbClassic, Method::AdSpherical, Method::AdThreepoint] {
        let g = render_gradient(&scene, m, &cfg).unwrap();
        println!("S1occ {}: relL1={:.4}", m.name(), rel_l1(&g, &fd, 0));
    }
}

#[test]
#[ignore]
fn probe_setting2() {
    for variant in [Variant::Occluding, Variant::FullyVisible] {
        let scene = build_case_scene(case(2, variant), 64);
        let cfg = IntegratorConfig { spp: 4096, seed: 11, ..Default::default() };
        let fd_cfg = IntegratorConfig { spp: 8192, ..cfg.clone() };
        let fd = render_gradient(&scene, Method::Fd, &fd_cfg).unwrap();
        for m in [Method::PrbThreepoint, Method::AdSpherical, Method::PrbClassic] {
            let g = render_gradient(&scene, m, &cfg).unwrap();
            println!("S2 {} {}: relL1={:.4}", variant.name(), m.name(), rel_l1(&g, &fd, 0));
        }
    }
}

#[test]
#[ignore]
fn probe_optimizer_scale() {
    let scene = build_case_scene(case(1, Variant::Occluding), 32);
    let cfg = IntegratorConfig { spp: 64, seed: 3, ..Default::default() };
    // loss landscape + gradient magnitude around the target
    let sweep = loss_sweep(&scene, 0.0, -0.6, 0.6, 13, &cfg);
    for (pi, loss) in &sweep {
        println!("sweep pi={pi:+.3} loss={loss:.6}");
    }
    for pi in [0.5, 0.25, 0.1, 0.02] {
        let s = diffrt::scene::Scene::new(
            scene.shapes.clone(),
            scene.bsdfs.clone(),
            scene.emitters.clone(),
            scene.camera.clone(),
            pi,
        );
        let target_cfg = IntegratorConfig { seed: diffrt::rng::derive_seed(cfg.seed, 0x7A46_E7), ..cfg.clone() };
        let target = render_image(
            &diffrt::scene::Scene::new(
                scene.shapes.clone(),
                scene.bsdfs.clone(),
                scene.emitters.clone(),
                scene.camera.clone(),
                0.0,
            ),
            &target_cfg,
        );
        let (loss, grad) = loss_gradient(&s, &target, Method::PrbThreepoint, &cfg).unwrap();
        println!("pi={pi:+.3} loss={loss:.6} grad={grad:+.6}");
    }
}
