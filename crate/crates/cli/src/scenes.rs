use std::fs;
use std::path::{Path, PathBuf};

use depthrl_core::disparity::{load_disparity, DisparityFormat, Quantization};
use depthrl_core::{DisparityMap, Error, Result};

/// Quantization sidecar for a PGM scene: same stem, `.json` extension.
pub fn sidecar_path(scene: &Path) -> PathBuf {
    scene.with_extension("json")
}

/// Loads a scene by extension. PGM files use their sidecar when present and
/// the default quantization otherwise.
pub fn load_scene(path: &Path) -> Result<DisparityMap> {
    let format = DisparityFormat::from_path(path)
        .ok_or_else(|| Error::Format(format!("{}: unknown disparity file extension", path.display())))?;
    let quant = match format {
        DisparityFormat::Pgm16 => {
            let side = sidecar_path(path);
            if side.exists() {
                Quantization::read_sidecar(&side)?
            } else {
                Quantization::pgm_default()
            }
        }
        _ => Quantization::identity(),
    };
    load_disparity(path, format, quant)
}

/// Scene files (`.pgm`, `.pfm`, `.csv`) directly inside `dir`, sorted by name.
pub fn list_scenes(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| Error::Io {
                path: dir.to_path_buf(),
                source: e,
            })?
            .path();
        if path.is_file() && DisparityFormat::from_path(&path).is_some() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

pub fn scene_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}
