//! Versioned JSON scene schema.
//!
//! Unknown fields are rejected with serde's location-bearing diagnostics;
//! schema version mismatches fail closed; every cross-reference is
//! validated after parse.

use crate::math::Vec3;
use crate::radiometry::{Bsdf, Emitter, Texture};
use crate::scene::{Camera, PiBinding, Scene, Shape};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SceneFileError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("scene parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported scene schema version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("scene validation error: {0}")]
    Validation(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub version: u32,
    pub camera: CameraDef,
    pub parameter: ParameterDef,
    pub bsdfs: Vec<BsdfDef>,
    pub emitters: Vec<EmitterDef>,
    pub shapes: Vec<ShapeDef>,
    #[serde(default)]
    pub render: RenderDefaults,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraDef {
    pub position: [f64; 3],
    pub look_at: [f64; 3],
    pub up: [f64; 3],
    pub fov_deg: f64,
    pub resolution: [u32; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterDef {
    pub name: String,
    pub initial_value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsdfDef {
    pub albedo: Texture,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterDef {
    pub radiance: Texture,
    #[serde(default)]
    pub two_sided: bool,
    #[serde(default)]
    pub pi_scales_radiance: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeDef {
    pub origin: [f64; 3],
    pub edge_u: [f64; 3],
    pub edge_v: [f64; 3],
    pub bsdf: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emitter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_binding: Option<PiBindingDef>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiBindingDef {
    pub axis: [f64; 3],
    pub scale: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderDefaults {
    #[serde(default = "default_spp")]
    pub spp: u32,
    #[serde(default = "default_depth")]
    pub max_depth: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_spp() -> u32 {
    64
}
fn default_depth() -> u32 {
    3
}
fn default_seed() -> u64 {
    1
}

impl Default for RenderDefaults {
    fn default() -> Self {
        RenderDefaults { spp: default_spp(), max_depth: default_depth(), seed: default_seed() }
    }
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl SceneFile {
    pub fn parse_str(text: &str) -> Result<SceneFile, SceneFileError> {
        let file: SceneFile = serde_json::from_str(text)?;
        if file.version != SCHEMA_VERSION {
            return Err(SceneFileError::Version { found: file.version, expected: SCHEMA_VERSION });
        }
        Ok(file)
    }

    pub fn load(path: &std::path::Path) -> Result<SceneFile, SceneFileError> {
        let text = std::fs::read_to_string(path)?;
        SceneFile::parse_str(&text)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), SceneFileError> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Validates cross-references and invariants and builds the scene.
    pub fn build(&self) -> Result<Scene, SceneFileError> {
        let err = |m: String| Err(SceneFileError::Validation(m));
        if self.camera.resolution[0] == 0 || self.camera.resolution[1] == 0 {
            return err("camera resolution must be nonzero".into());
        }
        if self.camera.fov_deg <= 0.0 || self.camera.fov_deg >= 180.0 {
            return err("fov_deg must be in (0, 180)".into());
        }
        for (i, b) in self.bsdfs.iter().enumerate() {
            Bsdf::diffuse(b.albedo.clone())
                .validate()
                .map_err(|e| SceneFileError::Validation(format!("bsdf {i}: {e}")))?;
        }
        for (i, e) in self.emitters.iter().enumerate() {
            e.radiance
                .validate()
                .map_err(|m| SceneFileError::Validation(format!("emitter {i}: {m}")))?;
        }
        let mut shapes = Vec::with_capacity(self.shapes.len());
        for (i, s) in self.shapes.iter().enumerate() {
            if s.bsdf >= self.bsdfs.len() {
                return err(format!("shape {i} references missing bsdf {}", s.bsdf));
            }
            if let Some(em) = s.emitter {
                if em >= self.emitters.len() {
                    return err(format!("shape {i} references missing emitter {em}"));
                }
            }
            let eu = v3(s.edge_u);
            let ev = v3(s.edge_v);
            if eu.cross(ev).length() < 1e-12 {
                return err(format!("shape {i} is degenerate (edge_u × edge_v = 0)"));
            }
            let binding = match &s.pi_binding {
                Some(b) => {
                    let axis = v3(b.axis);
                    if (axis.length() - 1.0).abs() > 1e-6 {
                        return err(format!("shape {i} pi_binding axis must be unit length"));
                    }
                    Some(PiBinding { axis, scale: b.scale })
                }
                None => None,
            };
            shapes.push(Shape {
                origin: v3(s.origin),
                edge_u: eu,
                edge_v: ev,
                binding,
                bsdf: s.bsdf,
                emitter: s.emitter,
            });
        }
        let camera = Camera::new(
            v3(self.camera.position),
            v3(self.camera.look_at),
            v3(self.camera.up),
            self.camera.fov_deg,
            self.camera.resolution[0],
            self.camera.resolution[1],
        );
        let emitters: Vec<Emitter> = self
            .emitters
            .iter()
            .map(|e| Emitter {
                radiance: e.radiance.clone(),
                two_sided: e.two_sided,
                pi_scales_radiance: e.pi_scales_radiance,
            })
            .collect();
        let bsdfs: Vec<Bsdf> = self.bsdfs.iter().map(|b| Bsdf::diffuse(b.albedo.clone())).collect();
        Ok(Scene::new(shapes, bsdfs, emitters, camera, self.parameter.initial_value))
    }
}

/// Parses and validates a scene file.
pub fn parse_scene(path: &std::path::Path) -> Result<(Scene, SceneFile), SceneFileError> {
    let file = SceneFile::load(path)?;
    let scene = file.build()?;
    Ok((scene, file))
}

/// Serializes a scene built in code (used to emit the case-study fixtures).
pub fn scene_to_file(scene: &Scene, fov_deg: f64, render: RenderDefaults) -> SceneFile {
    let cam = &scene.camera;
    SceneFile {
        version: SCHEMA_VERSION,
        camera: CameraDef {
            position: [cam.position.x, cam.position.y, cam.position.z],
            look_at: [
                cam.position.x + cam.forward.x,
                cam.position.y + cam.forward.y,
                cam.position.z + cam.forward.z,
            ],
            up: [cam.up.x, cam.up.y, cam.up.z],
            fov_deg,
            resolution: [cam.width, cam.height],
        },
        parameter: ParameterDef { name: "pi".into(), initial_value: scene.pi_init },
        bsdfs: scene.bsdfs.iter().map(|b| BsdfDef { albedo: b.albedo.clone() }).collect(),
        emitters: scene
            .emitters
            .iter()
            .map(|e| EmitterDef {
                radiance: e.radiance.clone(),
                two_sided: e.two_sided,
                pi_scales_radiance: e.pi_scales_radiance,
            })
            .collect(),
        shapes: scene
            .shapes
            .iter()
            .map(|s| ShapeDef {
                origin: [s.origin.x, s.origin.y, s.origin.z],
                edge_u: [s.edge_u.x, s.edge_u.y, s.edge_u.z],
                edge_v: [s.edge_v.x, s.edge_v.y, s.edge_v.z],
                bsdf: s.bsdf,
                emitter: s.emitter,
                pi_binding: s.binding.as_ref().map(|b| PiBindingDef {
                    axis: [b.axis.x, b.axis.y, b.axis.z],
                    scale: b.scale,
                }),
            })
            .collect(),
        render,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "version": 1,
        "camera": { "position": [0,0,0], "look_at": [0,0,1], "up": [0,1,0],
                    "fov_deg": 20.0, "resolution": [8,8] },
        "parameter": { "name": "depth", "initial_value": 0.0 },
        "bsdfs": [ { "albedo": { "kind": "constant", "rgb": [0,0,0] } } ],
        "emitters": [ { "radiance": { "kind": "constant", "rgb": [1,1,1] } } ],
        "shapes": [ { "origin": [-0.5,-0.5,2], "edge_u": [0,1,0], "edge_v": [1,0,0],
                      "bsdf": 0, "emitter": 0 } ]
    }"#;

    #[test]
    fn minimal_scene_parses_and_builds() {
        let f = SceneFile::parse_str(MINIMAL).unwrap();
        let scene = f.build().unwrap();
        assert_eq!(scene.shapes.len(), 1);
        assert_eq!(scene.total_emitter_area(), 1.0);
    }

    #[test]
    fn dangling_bsdf_reference_names_the_id() {
        let text = MINIMAL.replace("\"bsdf\": 0", "\"bsdf\": 3");
        let f = SceneFile::parse_str(&text).unwrap();
        let e = f.build().unwrap_err();
        assert!(e.to_string().contains("missing bsdf 3"), "{e}");
    }

    #[test]
    fn version_mismatch_fails_closed() {
        let text = MINIMAL.replace("\"version\": 1", "\"version\": 2");
        let e = SceneFile::parse_str(&text).unwrap_err();
        assert!(matches!(e, SceneFileError::Version { found: 2, .. }), "{e}");
    }

    #[test]
    fn unknown_field_rejected_with_location() {
        let text = MINIMAL.replace("\"fov_deg\"", "\"fov_degrees_typo\": 1.0, \"fov_deg\"");
        let e = SceneFile::parse_str(&text).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("unknown field"), "{msg}");
        assert!(msg.contains("line"), "diagnostic should carry a location: {msg}");
    }

    #[test]
    fn duplicate_parameter_rejected() {
        let text = MINIMAL.replace(
            "\"parameter\": { \"name\": \"depth\", \"initial_value\": 0.0 },",
            "\"parameter\": { \"name\": \"depth\", \"initial_value\": 0.0 },\n        \"parameter\": { \"name\": \"second\", \"initial_value\": 1.0 },",
        );
        let e = SceneFile::parse_str(&text).unwrap_err();
        assert!(e.to_string().contains("duplicate field"), "{e}");
    }

    #[test]
    fn non_unit_binding_axis_rejected() {
        let text = MINIMAL.replace(
            "\"bsdf\": 0, \"emitter\": 0",
            "\"bsdf\": 0, \"emitter\": 0, \"pi_binding\": { \"axis\": [0,0,2], \"scale\": 1.0 }",
        );
        let f = SceneFile::parse_str(&text).unwrap();
        assert!(f.build().is_err());
    }
}
