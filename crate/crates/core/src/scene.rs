use std::sync::Arc;

use crate::camera::Camera;
use crate::light::{EnvironmentLight, PointLight};
use crate::material::MaterialMaps;
use crate::math::RigidTransform;
use crate::mesh::Mesh;

/// One placed object. `model_to_world` maps mesh coordinates to world space.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub mesh: Arc<Mesh>,
    pub model_to_world: RigidTransform,
    pub material: Arc<MaterialMaps>,
}

/// Everything needed to render one frame.
///
/// Instance `i` is labelled `i + 1` in instance-id buffers; 0 is background.
/// `support_plane` is the height of an optional horizontal ground plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub instances: Vec<Instance>,
    pub environment: EnvironmentLight,
    pub point_lights: Vec<PointLight>,
    pub camera: Camera,
    pub support_plane: Option<f64>,
}

impl Scene {
    pub fn new(camera: Camera, environment: EnvironmentLight) -> Self {
        Self {
            instances: Vec::new(),
            environment,
            point_lights: Vec::new(),
            camera,
            support_plane: None,
        }
    }

    pub fn instance_id(index: usize) -> u32 {
        index as u32 + 1
    }

    pub fn triangle_count(&self) -> usize {
        self.instances.iter().map(|i| i.mesh.triangles.len()).sum()
    }
}
