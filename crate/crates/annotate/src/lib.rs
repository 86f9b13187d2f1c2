//! Ground truth for rendered frames following the BOP conventions: an
//! amodal mask (the silhouette ignoring occluders), a visible mask, tight
//! boxes, pixel counts and the visible fraction for every instance.
//!
//! All masks come from the unjittered pixel-center ray, the same ray that
//! fills the instance-id and depth buffers.

use partsynth_core::camera::Camera;
use partsynth_core::math::RigidTransform;
use partsynth_core::scene::Scene;
use partsynth_render::{Bvh, FrameBuffers};
use rayon::prelude::*;

/// A binary image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    pub width: u32,
    pub height: u32,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![false; width as usize * height as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn count(&self) -> u64 {
        self.data.iter().filter(|&&b| b).count() as u64
    }

    /// Tight `[x, y, w, h]` box, or `[0, 0, 0, 0]` for an empty mask.
    pub fn bbox(&self) -> [i32; 4] {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        if x0 == u32::MAX {
            return [0; 4];
        }
        [x0 as i32, y0 as i32, (x1 - x0 + 1) as i32, (y1 - y0 + 1) as i32]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceAnnotation {
    pub obj_id: u32,
    /// Model to camera.
    pub pose_m2c: RigidTransform,
    pub bbox_obj: [i32; 4],
    pub bbox_visib: [i32; 4],
    pub px_count_all: u64,
    pub px_count_visib: u64,
    pub visib_fract: f64,
}

impl InstanceAnnotation {
    /// Annotation from a pair of masks; counts, boxes and fraction follow
    /// from them.
    pub fn from_masks(obj_id: u32, pose_m2c: RigidTransform, amodal: &Mask, visible: &Mask) -> Self {
        let px_count_all = amodal.count();
        let px_count_visib = visible.count();
        Self {
            obj_id,
            pose_m2c,
            bbox_obj: amodal.bbox(),
            bbox_visib: visible.bbox(),
            px_count_all,
            px_count_visib,
            visib_fract: visib_fract(px_count_visib, px_count_all),
        }
    }
}

pub fn visib_fract(visible: u64, all: u64) -> f64 {
    if all == 0 {
        0.0
    } else {
        (visible as f64 / all as f64).min(1.0)
    }
}

/// One instance's annotation together with the masks it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedInstance {
    pub annotation: InstanceAnnotation,
    pub amodal: Mask,
    pub visible: Mask,
}

/// Silhouette of instance `index` seen through `camera`, with every other
/// object and the support plane ignored.
pub fn render_amodal_mask(scene: &Scene, index: usize, camera: &Camera) -> Mask {
    let bvh = Bvh::build_instance(scene, index);
    let (w, h) = (camera.intrinsics.width, camera.intrinsics.height);
    let mut mask = Mask::empty(w, h);
    if bvh.is_empty() {
        return mask;
    }
    mask.data
        .par_chunks_mut(w as usize)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, px) in row.iter_mut().enumerate() {
                let (ray, _) = camera.ray(x as f64, y as f64);
                *px = bvh.occluded(&ray.origin, &ray.dir, 0.0, f64::INFINITY);
            }
        });
    mask
}

/// Pixels whose primary hit is instance `index`.
pub fn extract_visible_mask(frame: &FrameBuffers, index: usize) -> Mask {
    let id = Scene::instance_id(index);
    Mask {
        width: frame.width,
        height: frame.height,
        data: frame.instance_id.iter().map(|&v| v == id).collect(),
    }
}

/// Model-to-camera pose of instance `index`.
pub fn pose_m2c(scene: &Scene, index: usize) -> RigidTransform {
    scene.camera.world_to_camera.compose(&scene.instances[index].model_to_world)
}

/// Annotations plus masks for every instance, in instance order. Instances
/// outside the view are kept with empty masks.
pub fn annotate_frame_with_masks(scene: &Scene, frame: &FrameBuffers) -> Vec<AnnotatedInstance> {
    (0..scene.instances.len())
        .map(|i| {
            let amodal = render_amodal_mask(scene, i, &scene.camera);
            let visible = extract_visible_mask(frame, i);
            let annotation = InstanceAnnotation::from_masks(scene.instances[i].mesh.object_id, pose_m2c(scene, i), &amodal, &visible);
            AnnotatedInstance {
                annotation,
                amodal,
                visible,
            }
        })
        .collect()
}

pub fn annotate_frame(scene: &Scene, frame: &FrameBuffers) -> Vec<InstanceAnnotation> {
    annotate_frame_with_masks(scene, frame).into_iter().map(|a| a.annotation).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_is_tight() {
        let mut m = Mask::empty(6, 5);
        m.data[6 + 2] = true;
        m.data[3 * 6 + 4] = true;
        assert_eq!(m.bbox(), [2, 1, 3, 3]);
        assert_eq!(m.count(), 2);
        assert_eq!(Mask::empty(3, 3).bbox(), [0; 4]);
    }

    #[test]
    fn fraction_of_empty_is_zero() {
        assert_eq!(visib_fract(0, 0), 0.0);
        assert_eq!(visib_fract(5, 5), 1.0);
        assert_eq!(visib_fract(1, 4), 0.25);
    }
}
