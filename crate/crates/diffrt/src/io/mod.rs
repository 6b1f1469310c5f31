//! Scene files, image output, and report records.

pub mod pfm;
pub mod png;
pub mod scene_file;

pub use pfm::{read_pfm, write_pfm, ImageBuffer, PfmError};
pub use png::{auto_scale, write_png_radiance, write_png_signed, PngError};
pub use scene_file::{parse_scene, scene_to_file, RenderDefaults, SceneFile, SceneFileError};

use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Appends one serialized record per line (JSON lines).
pub fn write_records<T: Serialize>(records: &[T], path: &Path) -> std::io::Result<()> {
    let mut out = std::fs::File::create(path)?;
    for r in records {
        let line = serde_json::to_string(r).expect("report serialization");
        writeln!(out, "{line}")?;
    }
    Ok(())
}
