use std::collections::BTreeMap;
use std::path::Path;

use image::GrayImage;
use partsynth_annotate::{visib_fract, InstanceAnnotation};
use partsynth_core::camera::CameraIntrinsics;
use partsynth_core::math::{Mat3, RigidTransform, Vec3};
use partsynth_core::mesh::Mesh;

use crate::json::{self, CameraEntry, CameraJson, GtEntry, GtInfoEntry, PerImage};
use crate::units::mm_to_m;
use crate::{scene_dir, BopError, BopFrame, BopScene, DepthImage, Result, SPLIT};

/// Rotations written with few digits are snapped to the nearest rotation
/// when they are off by less than this.
const ROTATION_REPAIR_LIMIT: f64 = 1e-3;

pub fn import_scene(root: &Path, scene_id: u32) -> Result<BopScene> {
    import_scene_split(root, SPLIT, scene_id)
}

/// Reads one scene. `scene_camera.json`, `scene_gt.json`, `camera.json` and
/// `models/` are required; `scene_gt_info.json` and image files are read
/// when present.
pub fn import_scene_split(root: &Path, split: &str, scene_id: u32) -> Result<BopScene> {
    let camera: CameraJson = json::read(&root.join("camera.json"))?;
    let dir = scene_dir(root, split, scene_id);
    let cam_path = dir.join("scene_camera.json");
    let gt_path = dir.join("scene_gt.json");
    let scene_camera: PerImage<CameraEntry> = json::read(&cam_path)?;
    let scene_gt: PerImage<Vec<GtEntry>> = json::read(&gt_path)?;
    let info_path = dir.join("scene_gt_info.json");
    let scene_gt_info: Option<PerImage<Vec<GtInfoEntry>>> = if info_path.exists() { Some(json::read(&info_path)?) } else { None };
    let models = load_models(&root.join("models"))?;

    if let Some(im) = scene_gt.keys().find(|k| !scene_camera.contains_key(k)) {
        return Err(BopError::Invalid(format!("{}: image {im} has no entry in scene_camera.json", gt_path.display())));
    }

    let intrinsics = CameraIntrinsics::new(camera.fx, camera.fy, camera.cx, camera.cy, camera.width, camera.height)
        .map_err(|e| BopError::Invalid(format!("{}: {e}", root.join("camera.json").display())))?;
    let mut frames = BTreeMap::new();
    for (&im, entry) in &scene_camera {
        let ctx = |key: &str| format!("{}: image {im}: {key}", cam_path.display());
        let k = entry.cam_K;
        let frame_k = CameraIntrinsics::new(k[0], k[4], k[2], k[5], camera.width, camera.height)
            .map_err(|e| BopError::Invalid(format!("{}: {e}", ctx("cam_K"))))?;
        let world_to_camera = match (entry.cam_R_w2c, entry.cam_t_w2c) {
            (Some(r), Some(t)) => Some(pose(&r, &t).map_err(|e| BopError::Invalid(format!("{}: {e}", ctx("cam_R_w2c"))))?),
            _ => None,
        };
        let gts = scene_gt.get(&im).map(Vec::as_slice).unwrap_or(&[]);
        let infos = scene_gt_info.as_ref().and_then(|m| m.get(&im));
        let mut annotations = Vec::with_capacity(gts.len());
        for (g, gt) in gts.iter().enumerate() {
            let pose_m2c = pose(&gt.cam_R_m2c, &gt.cam_t_m2c)
                .map_err(|e| BopError::Invalid(format!("{}: image {im}[{g}].cam_R_m2c: {e}", gt_path.display())))?;
            let info = infos.and_then(|v| v.get(g));
            annotations.push(match info {
                Some(i) => InstanceAnnotation {
                    obj_id: gt.obj_id,
                    pose_m2c,
                    bbox_obj: i.bbox_obj,
                    bbox_visib: i.bbox_visib,
                    px_count_all: i.px_count_all,
                    px_count_visib: i.px_count_visib,
                    visib_fract: i.visib_fract,
                },
                None => InstanceAnnotation {
                    obj_id: gt.obj_id,
                    pose_m2c,
                    bbox_obj: [0; 4],
                    bbox_visib: [0; 4],
                    px_count_all: 0,
                    px_count_visib: 0,
                    visib_fract: visib_fract(0, 0),
                },
            });
        }
        let name = format!("{im:06}");
        let rgb = read_optional(&dir.join("rgb").join(format!("{name}.png")))?.map(|i| i.into_rgb8());
        let depth: Option<DepthImage> = read_optional(&dir.join("depth").join(format!("{name}.png")))?.map(|i| i.into_luma16());
        let masks = read_masks(&dir.join("mask"), &name, gts.len())?;
        let masks_visib = read_masks(&dir.join("mask_visib"), &name, gts.len())?;
        frames.insert(
            im,
            BopFrame {
                intrinsics: frame_k,
                depth_scale: entry.depth_scale,
                world_to_camera,
                annotations,
                rgb,
                depth,
                masks,
                masks_visib,
            },
        );
    }
    let scene = BopScene {
        scene_id,
        intrinsics,
        depth_scale: camera.depth_scale,
        frames,
        models,
    };
    scene.validate()?;
    Ok(scene)
}

fn pose(r: &[f64; 9], t_mm: &[f64; 3]) -> std::result::Result<RigidTransform, partsynth_core::GeometryError> {
    let t = t_mm.map(mm_to_m);
    RigidTransform::from_row_major(r, t).or_else(|e| {
        let m = Mat3::from_row_slice(r);
        if partsynth_core::math::rotation_deviation(&m) > ROTATION_REPAIR_LIMIT {
            return Err(e);
        }
        let svd = m.svd(true, true);
        let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
        let mut fixed = u * v_t;
        if fixed.determinant() < 0.0 {
            fixed = u * Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0)) * v_t;
        }
        RigidTransform::new(fixed, Vec3::from(t))
    })
}

fn read_optional(path: &Path) -> Result<Option<image::DynamicImage>> {
    if !path.exists() {
        return Ok(None);
    }
    image::open(path).map(Some).map_err(|source| BopError::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// All masks of an image, or none when the first is absent.
fn read_masks(dir: &Path, name: &str, count: usize) -> Result<Vec<GrayImage>> {
    let mut out = Vec::with_capacity(count);
    for gt in 0..count {
        let path = dir.join(format!("{name}_{gt:06}.png"));
        match read_optional(&path)? {
            Some(img) => out.push(img.into_luma8()),
            None if gt == 0 => return Ok(Vec::new()),
            None => return Err(BopError::Missing { path }),
        }
    }
    Ok(out)
}

fn load_models(dir: &Path) -> Result<BTreeMap<u32, Mesh>> {
    let entries = std::fs::read_dir(dir).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            BopError::Missing { path: dir.to_path_buf() }
        } else {
            BopError::Io {
                path: dir.to_path_buf(),
                source,
            }
        }
    })?;
    let mut models = BTreeMap::new();
    for entry in entries {
        let path = entry
            .map_err(|source| BopError::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        let Some(id) = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_prefix("obj_")?.strip_suffix(".ply"))
            .and_then(|n| n.parse::<u32>().ok())
        else {
            continue;
        };
        let mesh = partsynth_core::mesh_io::load_mesh_auto(&path).map_err(|source| BopError::Mesh { path: path.clone(), source })?;
        let mut mesh = mesh.with_object_id(id);
        for v in &mut mesh.vertices {
            *v = v.map(mm_to_m);
        }
        models.insert(id, mesh);
    }
    Ok(models)
}
