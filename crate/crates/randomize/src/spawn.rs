use std::sync::Arc;

use partsynth_core::math::{Aabb, RigidTransform, Vec3};
use partsynth_core::mesh::Mesh;
use partsynth_core::rng::RandomStream;

use crate::camera::sample_uniform_rotation;
use crate::{check_count_range, RandomizeError};

#[derive(Clone, Debug)]
pub struct SpawnSpec {
    /// Positions are drawn uniformly inside this box (meters).
    pub volume: Aabb,
    pub model_catalog: Vec<Arc<Mesh>>,
    pub count_range: [u32; 2],
    pub unique_models: bool,
    pub rest_on_plane: bool,
    /// Height of the support plane used by `rest_on_plane`.
    pub plane_y: f64,
    pub max_placement_attempts: u32,
}

impl SpawnSpec {
    pub fn validate(&self) -> Result<(), RandomizeError> {
        check_count_range("object count", self.count_range)?;
        if self.volume.is_empty() {
            return Err(RandomizeError::InvalidSpec("spawn volume is empty".into()));
        }
        if self.count_range[1] > 0 && self.model_catalog.is_empty() {
            return Err(RandomizeError::InvalidSpec("model catalog is empty".into()));
        }
        if self.unique_models && self.count_range[1] as usize > self.model_catalog.len() {
            return Err(RandomizeError::InvalidSpec(format!(
                "{} unique models requested from a catalog of {}",
                self.count_range[1],
                self.model_catalog.len()
            )));
        }
        if self.max_placement_attempts == 0 {
            return Err(RandomizeError::InvalidSpec("max_placement_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

/// One placed object.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    /// Index into the spawn catalog.
    pub model_index: usize,
    pub mesh: Arc<Mesh>,
    pub model_to_world: RigidTransform,
}

/// Draws model indices: with replacement, or a partial Fisher-Yates
/// shuffle when every model may appear at most once.
fn choose_models(catalog_len: usize, count: usize, unique: bool, rng: &mut RandomStream) -> Vec<usize> {
    if unique {
        let mut pool: Vec<usize> = (0..catalog_len).collect();
        for i in 0..count {
            let j = i + rng.below((catalog_len - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    } else {
        (0..count).map(|_| rng.below(catalog_len as u64) as usize).collect()
    }
}

fn random_pose(mesh: &Mesh, spec: &SpawnSpec, rng: &mut RandomStream) -> RigidTransform {
    let rotation = sample_uniform_rotation(rng);
    let v = &spec.volume;
    let position = Vec3::new(
        rng.uniform(v.min.x, v.max.x),
        rng.uniform(v.min.y, v.max.y),
        rng.uniform(v.min.z, v.max.z),
    );
    let mut pose = RigidTransform::new(rotation, position).expect("sampled rotation is orthonormal");
    if spec.rest_on_plane {
        let lowest = mesh
            .vertices
            .iter()
            .map(|p| pose.transform_point(p).y)
            .fold(f64::INFINITY, f64::min);
        if lowest.is_finite() {
            pose = pose.translated(&Vec3::new(0.0, spec.plane_y - lowest, 0.0));
        }
    }
    pose
}

/// Places a random number of catalog models in the spawn volume.
///
/// A placement whose world AABB overlaps an earlier one is redrawn, up to
/// `max_placement_attempts` draws in total; the last draw is then kept and
/// a warning logged.
pub fn spawn_objects(spec: &SpawnSpec, rng: &mut RandomStream) -> Result<Vec<Placement>, RandomizeError> {
    spec.validate()?;
    let count = rng.uniform_int(spec.count_range[0] as u64, spec.count_range[1] as u64) as usize;
    if count == 0 {
        return Ok(Vec::new());
    }
    let models = choose_models(spec.model_catalog.len(), count, spec.unique_models, rng);
    let mut placed: Vec<Placement> = Vec::with_capacity(count);
    let mut boxes: Vec<Aabb> = Vec::with_capacity(count);
    for model_index in models {
        let mesh = &spec.model_catalog[model_index];
        let mut attempt = 0;
        let (pose, bounds) = loop {
            attempt += 1;
            let pose = random_pose(mesh, spec, rng);
            let bounds = mesh.transformed_aabb(&pose);
            let clear = !boxes.iter().any(|b| b.overlaps(&bounds));
            if clear {
                break (pose, bounds);
            }
            if attempt >= spec.max_placement_attempts {
                log::warn!(
                    "model {model_index} still overlaps after {attempt} placement attempts; keeping the overlapping pose"
                );
                break (pose, bounds);
            }
        };
        boxes.push(bounds);
        placed.push(Placement {
            model_index,
            mesh: Arc::clone(mesh),
            model_to_world: pose,
        });
    }
    Ok(placed)
}
