//! The checked-in scene files must stay in sync with the built-in case
//! scenes.

use diffrt::experiments::{build_case_scene, CaseSetting, Variant};
use diffrt::io::parse_scene;
use std::path::PathBuf;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(name)
}

#[test]
fn fixture_files_match_builders() {
    for (id, name) in [
        (1u8, "setting1_occluding.json"),
        (2, "setting2_occluding.json"),
        (3, "setting3_occluding.json"),
    ] {
        let (scene, _) = parse_scene(&fixture(name)).unwrap();
        let built = build_case_scene(CaseSetting { id, variant: Variant::Occluding }, 64);
        assert_eq!(scene.shapes.len(), built.shapes.len(), "{name}");
        for (a, b) in scene.shapes.iter().zip(built.shapes.iter()) {
            assert_eq!(a.origin, b.origin, "{name}");
            assert_eq!(a.edge_u, b.edge_u, "{name}");
            assert_eq!(a.edge_v, b.edge_v, "{name}");
            assert_eq!(a.bsdf, b.bsdf, "{name}");
            assert_eq!(a.emitter, b.emitter, "{name}");
            match (&a.binding, &b.binding) {
                (None, None) => {}
                (Some(x), Some(y)) => {
                    assert_eq!(x.axis, y.axis, "{name}");
                    assert_eq!(x.scale, y.scale, "{name}");
                }
                _ => panic!("{name}: binding mismatch"),
            }
        }
        assert_eq!(scene.pi_init, built.pi_init);
        assert_eq!(scene.total_emitter_area(), built.total_emitter_area());
    }
}
