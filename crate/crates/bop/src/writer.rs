use std::path::{Path, PathBuf};

use image::ImageEncoder;
use partsynth_core::camera::CameraIntrinsics;
use partsynth_core::math::RigidTransform;
use partsynth_core::mesh::Mesh;

use crate::json::{self, CameraEntry, CameraJson, GtEntry, GtInfoEntry, PerImage};
use crate::units::m_to_mm;
use crate::{scene_dir, BopError, BopFrame, BopScene, Result, SPLIT};

/// Incremental writer for one scene. Image files are written as frames
/// arrive; the three per-scene JSON files are rewritten by [`BopWriter::finish`].
pub struct BopWriter {
    scene_dir: PathBuf,
    camera: PerImage<CameraEntry>,
    gt: PerImage<Vec<GtEntry>>,
    gt_info: PerImage<Vec<GtInfoEntry>>,
}

impl BopWriter {
    /// Creates the directory tree and writes `camera.json` and the models.
    pub fn create<'a>(
        root: &Path,
        scene_id: u32,
        intrinsics: &CameraIntrinsics,
        depth_scale: f64,
        models: impl IntoIterator<Item = &'a Mesh>,
    ) -> Result<Self> {
        let scene_dir = scene_dir(root, SPLIT, scene_id);
        for sub in ["rgb", "depth", "mask", "mask_visib"] {
            create_dir(&scene_dir.join(sub))?;
        }
        let models_dir = root.join("models");
        create_dir(&models_dir)?;
        for mesh in models {
            write_model(mesh, &models_dir.join(format!("obj_{:06}.ply", mesh.object_id)))?;
        }
        json::write(
            &root.join("camera.json"),
            &CameraJson {
                cx: intrinsics.cx,
                cy: intrinsics.cy,
                depth_scale,
                fx: intrinsics.fx,
                fy: intrinsics.fy,
                height: intrinsics.height,
                width: intrinsics.width,
            },
        )?;
        Ok(Self {
            scene_dir,
            camera: PerImage::new(),
            gt: PerImage::new(),
            gt_info: PerImage::new(),
        })
    }

    pub fn scene_dir(&self) -> &Path {
        &self.scene_dir
    }

    pub fn write_frame(&mut self, image_id: u32, frame: &BopFrame) -> Result<()> {
        write_frame_images(&self.scene_dir, image_id, frame)?;
        self.record(image_id, frame);
        Ok(())
    }

    /// Adds the frame's JSON records without touching image files.
    pub fn record(&mut self, image_id: u32, frame: &BopFrame) {
        self.camera.insert(
            image_id,
            CameraEntry {
                cam_K: frame.intrinsics.matrix_row_major(),
                cam_R_w2c: frame.world_to_camera.map(|p| p.rotation_row_major()),
                cam_t_w2c: frame.world_to_camera.map(|p| translation_mm(&p)),
                depth_scale: frame.depth_scale,
            },
        );
        self.gt.insert(
            image_id,
            frame
                .annotations
                .iter()
                .map(|a| GtEntry {
                    cam_R_m2c: a.pose_m2c.rotation_row_major(),
                    cam_t_m2c: translation_mm(&a.pose_m2c),
                    obj_id: a.obj_id,
                })
                .collect(),
        );
        self.gt_info.insert(
            image_id,
            frame
                .annotations
                .iter()
                .map(|a| GtInfoEntry {
                    bbox_obj: a.bbox_obj,
                    bbox_visib: a.bbox_visib,
                    px_count_all: a.px_count_all,
                    px_count_visib: a.px_count_visib,
                    visib_fract: a.visib_fract,
                })
                .collect(),
        );
    }

    pub fn finish(&self) -> Result<()> {
        json::write(&self.scene_dir.join("scene_camera.json"), &self.camera)?;
        json::write(&self.scene_dir.join("scene_gt.json"), &self.gt)?;
        json::write(&self.scene_dir.join("scene_gt_info.json"), &self.gt_info)
    }
}

fn translation_mm(p: &RigidTransform) -> [f64; 3] {
    let t = p.translation();
    [m_to_mm(t.x), m_to_mm(t.y), m_to_mm(t.z)]
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|source| BopError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_model(mesh: &Mesh, path: &Path) -> Result<()> {
    let mut mm = mesh.clone();
    for v in &mut mm.vertices {
        *v = v.map(m_to_mm);
    }
    partsynth_core::mesh_io::save_ply(&mm, path).map_err(|source| BopError::Mesh {
        path: path.to_path_buf(),
        source,
    })
}

fn write_png(path: &Path, data: &[u8], width: u32, height: u32, color: image::ExtendedColorType) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| BopError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    image::codecs::png::PngEncoder::new(std::io::BufWriter::new(file))
        .write_image(data, width, height, color)
        .map_err(|source| BopError::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes the image files of one frame. Safe to call concurrently for
/// distinct image ids.
pub fn write_frame_images(scene_dir: &Path, image_id: u32, frame: &BopFrame) -> Result<()> {
    let im = format!("{image_id:06}");
    if let Some(rgb) = &frame.rgb {
        write_png(&scene_dir.join("rgb").join(format!("{im}.png")), rgb.as_raw(), rgb.width(), rgb.height(), image::ExtendedColorType::Rgb8)?;
    }
    if let Some(depth) = &frame.depth {
        let bytes: Vec<u8> = depth.as_raw().iter().flat_map(|v| v.to_ne_bytes()).collect();
        write_png(&scene_dir.join("depth").join(format!("{im}.png")), &bytes, depth.width(), depth.height(), image::ExtendedColorType::L16)?;
    }
    for (dir, masks) in [("mask", &frame.masks), ("mask_visib", &frame.masks_visib)] {
        for (gt, m) in masks.iter().enumerate() {
            write_png(&scene_dir.join(dir).join(format!("{im}_{gt:06}.png")), m.as_raw(), m.width(), m.height(), image::ExtendedColorType::L8)?;
        }
    }
    Ok(())
}

/// Writes a complete scene, models and `camera.json` included.
pub fn export_scene(scene: &BopScene, root: &Path) -> Result<()> {
    scene.validate()?;
    let mut writer = BopWriter::create(root, scene.scene_id, &scene.intrinsics, scene.depth_scale, scene.models.values())?;
    for (&im, frame) in &scene.frames {
        writer.write_frame(im, frame)?;
    }
    writer.finish()
}
