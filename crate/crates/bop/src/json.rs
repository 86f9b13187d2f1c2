//! On-disk records. Field order is the serialization order.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{BopError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraJson {
    pub cx: f64,
    pub cy: f64,
    pub depth_scale: f64,
    pub fx: f64,
    pub fy: f64,
    pub height: u32,
    pub width: u32,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraEntry {
    pub cam_K: [f64; 9],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cam_R_w2c: Option<[f64; 9]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cam_t_w2c: Option<[f64; 3]>,
    #[serde(default = "default_depth_scale")]
    pub depth_scale: f64,
}

fn default_depth_scale() -> f64 {
    1.0
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtEntry {
    pub cam_R_m2c: [f64; 9],
    pub cam_t_m2c: [f64; 3],
    pub obj_id: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtInfoEntry {
    pub bbox_obj: [i32; 4],
    pub bbox_visib: [i32; 4],
    pub px_count_all: u64,
    pub px_count_visib: u64,
    pub visib_fract: f64,
}

/// Maps keyed by image id serialize in ascending numeric order.
pub type PerImage<T> = BTreeMap<u32, T>;

pub fn write<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| BopError::Json {
        path: path.to_path_buf(),
        key: String::new(),
        message: e.to_string(),
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| BopError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            BopError::Missing { path: path.to_path_buf() }
        } else {
            BopError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| BopError::Json {
        path: path.to_path_buf(),
        key: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}
