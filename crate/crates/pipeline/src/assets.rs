use std::f64::consts::PI;
use std::sync::Arc;

use partsynth_core::camera::CameraIntrinsics;
use partsynth_core::light::EnvironmentLight;
use partsynth_core::material::MaterialMaps;
use partsynth_core::math::{Aabb, Vec3};
use partsynth_core::mesh::Mesh;
use partsynth_core::mesh_io::load_mesh_auto;
use partsynth_core::texture::{ColorSpace, TextureMap};
use partsynth_randomize::{CameraRangeSpec, LightSpec, MaterialSpec, SpawnSpec};
use partsynth_render::RenderProfile;

use crate::config::{BoxConfig, DatasetConfig, EnvironmentSource, MaterialSource, Units};
use crate::PipelineError;

/// Everything a frame needs, loaded once per run.
#[derive(Clone, Debug)]
pub struct Assets {
    pub intrinsics: CameraIntrinsics,
    pub profile: RenderProfile,
    pub camera: CameraRangeSpec,
    pub spawn: SpawnSpec,
    pub lights: LightSpec,
    pub materials: MaterialSpec,
    pub support_plane: Option<f64>,
}

fn aabb(b: &BoxConfig) -> Aabb {
    Aabb::new(Vec3::from(b.min), Vec3::from(b.max))
}

fn radians(r: [f64; 2]) -> [f64; 2] {
    r.map(|d| d * PI / 180.0)
}

pub fn default_material() -> MaterialMaps {
    MaterialMaps::uniform([0.6; 3], 0.4, 0.0)
}

pub fn load_models(paths: &[std::path::PathBuf], units: Units) -> Result<Vec<Arc<Mesh>>, PipelineError> {
    paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mesh = load_mesh_auto(p).map_err(|e| PipelineError::Asset(format!("{}: {e}", p.display())))?;
            let mesh = match units {
                Units::M => mesh,
                Units::Mm => mesh.scaled(1e-3),
            };
            Ok(Arc::new(mesh.with_object_id(i as u32 + 1)))
        })
        .collect()
}

impl Assets {
    pub fn load(config: &DatasetConfig) -> Result<Self, PipelineError> {
        let [w, h] = config.resolution;
        let intrinsics = CameraIntrinsics::from_fov(w, h, config.horizontal_fov_deg * PI / 180.0)
            .map_err(|e| PipelineError::Asset(format!("camera intrinsics: {e}")))?;

        let c = &config.camera;
        let camera = CameraRangeSpec {
            theta_range: radians(c.theta_deg),
            phi_range: radians(c.phi_deg),
            r_range: c.r,
            target: Vec3::from(c.target),
        };

        let s = &config.spawn;
        let spawn = SpawnSpec {
            volume: aabb(&s.volume),
            model_catalog: load_models(&s.models, s.model_units)?,
            count_range: s.count_range,
            unique_models: s.unique_models,
            rest_on_plane: s.rest_on_plane,
            plane_y: s.plane_y,
            max_placement_attempts: s.max_placement_attempts,
        };

        let l = &config.lights;
        let env_catalog = l
            .environments
            .iter()
            .map(|e| match e {
                EnvironmentSource::Constant { constant } => Ok(EnvironmentLight::constant(*constant)),
                EnvironmentSource::File(p) => TextureMap::load(p, ColorSpace::Linear)
                    .and_then(|t| EnvironmentLight::new(Arc::new(t.to_linear()), 0.0, 0.0))
                    .map_err(|e| PipelineError::Asset(format!("{}: {e}", p.display()))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let lights = LightSpec {
            env_catalog,
            exposure_ev_range: l.exposure_ev,
            rotation_range: radians(l.rotation_deg),
            extra_light_count_range: l.extra_light_count,
            intensity_range: l.intensity,
            radius_range: l.radius,
            position_volume: aabb(&l.position_volume),
        };

        let m = &config.materials;
        let size = m.uniform_texture_size;
        let mut material_catalog = m
            .catalog
            .iter()
            .map(|src| match src {
                MaterialSource::Directory(p) => {
                    MaterialMaps::load_dir(p).map_err(|e| PipelineError::Asset(format!("{}: {e}", p.display())))
                }
                MaterialSource::Uniform {
                    albedo,
                    roughness,
                    metallic,
                } => Ok(MaterialMaps::uniform(*albedo, *roughness, *metallic).expanded_to(size, size)),
            })
            .map(|r| r.map(Arc::new))
            .collect::<Result<Vec<_>, _>>()?;
        if material_catalog.is_empty() {
            material_catalog.push(Arc::new(default_material().expanded_to(size, size)));
        }
        let materials = MaterialSpec {
            material_catalog,
            hsv_offset_ranges: m.hsv_offset_ranges,
            defect_probabilities: m.defect_probabilities,
            defect_parameter_ranges: m.defect_parameter_ranges,
        };

        let assets = Self {
            intrinsics,
            profile: config.profile(),
            camera,
            spawn,
            lights,
            materials,
            support_plane: s.support_plane.then_some(s.plane_y),
        };
        assets.validate()?;
        Ok(assets)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let err = |e: partsynth_randomize::RandomizeError| PipelineError::Asset(e.to_string());
        self.camera.validate().map_err(err)?;
        self.spawn.validate().map_err(err)?;
        self.lights.validate().map_err(err)?;
        self.materials.validate().map_err(err)?;
        self.profile.validate().map_err(|e| PipelineError::Asset(e.to_string()))
    }
}
