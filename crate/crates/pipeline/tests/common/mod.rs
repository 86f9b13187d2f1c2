#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use partsynth_core::mesh::Mesh;
use partsynth_core::mesh_io::save_ply;
use partsynth_core::texture::{ColorSpace, TextureMap};

/// A cube model and a small sky-like environment map in `dir`.
pub fn write_assets(dir: &Path) -> (PathBuf, PathBuf) {
    let model = dir.join("cube.ply");
    save_ply(&Mesh::cube(0.08, 1), &model).unwrap();
    let env = dir.join("sky.hdr");
    let sky = TextureMap::from_fn(32, 16, 3, ColorSpace::Linear, |_, y, o| {
        let t = 1.5 - y as f32 / 16.0;
        o.copy_from_slice(&[0.6 * t, 0.7 * t, 0.9 * t]);
    });
    sky.save_hdr(&env).unwrap();
    (model, env)
}

/// Writes a config into `dir` and returns its path. `extra` is merged
/// over the base document.
pub fn write_config(dir: &Path, extra: serde_json::Value) -> PathBuf {
    let (model, env) = write_assets(dir);
    let mut doc = serde_json::json!({
        "seed": 7,
        "num_images": 2,
        "resolution": [64, 48],
        "profile": {"mode": "preview"},
        "spawn": {"models": [model.file_name().unwrap().to_str().unwrap()]},
        "lights": {"environments": [env.file_name().unwrap().to_str().unwrap()]},
        "output_root": "out"
    });
    merge(&mut doc, extra);
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    path
}

fn merge(base: &mut serde_json::Value, extra: serde_json::Value) {
    match (base, extra) {
        (serde_json::Value::Object(b), serde_json::Value::Object(e)) => {
            for (k, v) in e {
                merge(b.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (b, e) => *b = e,
    }
}

/// Every file under `root` except `skip`, by relative path.
pub fn tree(root: &Path, skip: &[&str]) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                if !skip.contains(&rel.as_str()) {
                    out.insert(rel, std::fs::read(&p).unwrap());
                }
            }
        }
    }
    out
}
