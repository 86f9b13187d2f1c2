//! Digital twin: re-render the poses of an existing BOP scene with catalog
//! materials and write a new tree with the same numbering and poses.

use std::path::Path;
use std::sync::Arc;

use partsynth_annotate::annotate_frame_with_masks;
use partsynth_bop::{import_scene, BopFrame, BopWriter};
use partsynth_core::camera::Camera;
use partsynth_core::light::EnvironmentLight;
use partsynth_core::material::MaterialMaps;
use partsynth_core::math::RigidTransform;
use partsynth_core::scene::{Instance, Scene};
use partsynth_render::{post_process, render_frame, RenderProfile};

use crate::PipelineError;

#[derive(Clone, Debug)]
pub struct TwinOptions {
    pub profile: RenderProfile,
    pub environment: EnvironmentLight,
    /// Used for every object.
    pub material: Arc<MaterialMaps>,
    pub seed: u64,
}

impl Default for TwinOptions {
    fn default() -> Self {
        Self {
            profile: RenderProfile::preview(),
            environment: EnvironmentLight::constant([1.0; 3]),
            material: Arc::new(crate::assets::default_material()),
            seed: 0,
        }
    }
}

/// Re-renders scene `scene_id` of the tree at `root` into `out`.
///
/// Scenes are rebuilt in the camera frame: the camera sits at the origin
/// and each object is placed with its model-to-camera pose. The exported
/// poses are the imported ones, unchanged. Returns the number of frames.
pub fn run_import_digital_twin(root: &Path, scene_id: u32, out: &Path, options: &TwinOptions) -> Result<usize, PipelineError> {
    let source = import_scene(root, scene_id)?;
    let models: std::collections::BTreeMap<u32, Arc<partsynth_core::mesh::Mesh>> =
        source.models.iter().map(|(id, m)| (*id, Arc::new(m.clone()))).collect();
    let mut writer = BopWriter::create(out, scene_id, &source.intrinsics, source.depth_scale, source.models.values())?;

    for (&im, frame) in &source.frames {
        let mut scene = Scene::new(Camera::new(frame.intrinsics, RigidTransform::identity()), options.environment.clone());
        scene.instances = frame
            .annotations
            .iter()
            .map(|a| Instance {
                mesh: Arc::clone(&models[&a.obj_id]),
                model_to_world: a.pose_m2c,
                material: Arc::clone(&options.material),
            })
            .collect();
        let buffers = render_frame(&scene, &options.profile, im as u64, options.seed).map_err(|e| PipelineError::frame(im as u64, "render", e))?;
        let rgb = post_process(&buffers.radiance, buffers.width, buffers.height, &options.profile);
        let mut annotated = annotate_frame_with_masks(&scene, &buffers);
        for (a, src) in annotated.iter_mut().zip(&frame.annotations) {
            a.annotation.pose_m2c = src.pose_m2c;
        }
        let mut out_frame = BopFrame::from_render(frame.intrinsics, RigidTransform::identity(), &annotated, rgb, &buffers.depth_z, frame.depth_scale)
            .map_err(|e| PipelineError::frame(im as u64, "export", e))?;
        out_frame.world_to_camera = frame.world_to_camera;
        writer.write_frame(im, &out_frame)?;
    }
    writer.finish()?;
    Ok(source.frames.len())
}
