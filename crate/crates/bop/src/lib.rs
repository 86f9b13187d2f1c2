//! The BOP dataset layout: `camera.json`, `models/obj_{id:06}.ply` and, per
//! scene, `train_pbr/{scene:06}/` with `rgb/`, `depth/`, `mask/`,
//! `mask_visib/` and the three JSON files.
//!
//! Translations are millimeters on disk and meters in memory.

mod json;
mod reader;
pub mod units;
mod writer;

use std::collections::BTreeMap;
use std::path::PathBuf;

use image::{GrayImage, ImageBuffer, Luma, RgbImage};
use partsynth_annotate::{AnnotatedInstance, InstanceAnnotation, Mask};
use partsynth_core::camera::CameraIntrinsics;
use partsynth_core::math::RigidTransform;
use partsynth_core::mesh::Mesh;

pub use reader::{import_scene, import_scene_split};
pub use units::{decode_depth, encode_depth, m_to_mm, mm_to_m};
pub use writer::{export_scene, write_frame_images, BopWriter};

pub const SPLIT: &str = "train_pbr";
pub const DEFAULT_DEPTH_SCALE: f64 = 0.1;

pub type DepthImage = ImageBuffer<Luma<u16>, Vec<u16>>;

#[derive(Debug, thiserror::Error)]
pub enum BopError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing")]
    Missing { path: PathBuf },
    #[error("{path}: at `{key}`: {message}")]
    Json { path: PathBuf, key: String, message: String },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Mesh {
        path: PathBuf,
        #[source]
        source: partsynth_core::MeshError,
    },
    #[error("depth {depth_mm} mm does not fit 16 bits at depth_scale {depth_scale}; use a larger depth_scale")]
    DepthOverflow { depth_mm: f64, depth_scale: f64 },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, BopError>;

/// One image of a scene.
#[derive(Clone, Debug, PartialEq)]
pub struct BopFrame {
    pub intrinsics: CameraIntrinsics,
    /// Millimeters per stored depth unit.
    pub depth_scale: f64,
    /// Absent when the source dataset does not record world-frame poses.
    pub world_to_camera: Option<RigidTransform>,
    pub annotations: Vec<InstanceAnnotation>,
    pub rgb: Option<RgbImage>,
    pub depth: Option<DepthImage>,
    /// Amodal masks, one per annotation, or empty when not available.
    pub masks: Vec<GrayImage>,
    pub masks_visib: Vec<GrayImage>,
}

impl BopFrame {
    /// Frame from render outputs. `depth_z` holds camera-space z in meters,
    /// 0 where nothing was hit.
    pub fn from_render(
        intrinsics: CameraIntrinsics,
        world_to_camera: RigidTransform,
        instances: &[AnnotatedInstance],
        rgb: RgbImage,
        depth_z: &[f64],
        depth_scale: f64,
    ) -> Result<Self> {
        let depth = encode_depth(depth_z, intrinsics.width, intrinsics.height, depth_scale)?;
        Ok(Self {
            intrinsics,
            depth_scale,
            world_to_camera: Some(world_to_camera),
            annotations: instances.iter().map(|a| a.annotation.clone()).collect(),
            rgb: Some(rgb),
            depth: Some(depth),
            masks: instances.iter().map(|a| mask_to_image(&a.amodal)).collect(),
            masks_visib: instances.iter().map(|a| mask_to_image(&a.visible)).collect(),
        })
    }
}

/// In-memory mirror of one scene directory plus the dataset models.
#[derive(Clone, Debug, PartialEq)]
pub struct BopScene {
    pub scene_id: u32,
    pub intrinsics: CameraIntrinsics,
    pub depth_scale: f64,
    pub frames: BTreeMap<u32, BopFrame>,
    /// Meshes in meters, keyed by `obj_id`.
    pub models: BTreeMap<u32, Mesh>,
}

impl BopScene {
    pub fn validate(&self) -> Result<()> {
        for (im, frame) in &self.frames {
            for a in &frame.annotations {
                if !self.models.contains_key(&a.obj_id) {
                    return Err(BopError::Invalid(format!("image {im}: obj_id {} has no model", a.obj_id)));
                }
            }
            for (kind, masks) in [("mask", &frame.masks), ("mask_visib", &frame.masks_visib)] {
                if !masks.is_empty() && masks.len() != frame.annotations.len() {
                    return Err(BopError::Invalid(format!(
                        "image {im}: {} {kind} images for {} annotations",
                        masks.len(),
                        frame.annotations.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `{0, 255}` grayscale image of a mask.
pub fn mask_to_image(mask: &Mask) -> GrayImage {
    GrayImage::from_vec(mask.width, mask.height, mask.data.iter().map(|&b| if b { 255 } else { 0 }).collect())
        .expect("mask size matches its data")
}

/// Any nonzero value counts as inside.
pub fn image_to_mask(img: &GrayImage) -> Mask {
    Mask {
        width: img.width(),
        height: img.height(),
        data: img.as_raw().iter().map(|&v| v > 0).collect(),
    }
}

pub fn scene_dir(root: &std::path::Path, split: &str, scene_id: u32) -> PathBuf {
    root.join(split).join(format!("{scene_id:06}"))
}
