use partsynth_core::light::{EnvironmentLight, PointLight};
use partsynth_core::math::{Aabb, Vec3};
use partsynth_core::rng::RandomStream;

use crate::{check_count_range, check_range, RandomizeError};

#[derive(Clone, Debug)]
pub struct LightSpec {
    pub env_catalog: Vec<EnvironmentLight>,
    /// Added to the chosen environment's own exposure.
    pub exposure_ev_range: [f64; 2],
    /// Added to the chosen environment's own rotation.
    pub rotation_range: [f64; 2],
    pub extra_light_count_range: [u32; 2],
    /// Radiant intensity (W/sr, equal in all channels).
    pub intensity_range: [f64; 2],
    pub radius_range: [f64; 2],
    pub position_volume: Aabb,
}

impl LightSpec {
    pub fn validate(&self) -> Result<(), RandomizeError> {
        if self.env_catalog.is_empty() {
            return Err(RandomizeError::InvalidSpec("environment catalog is empty".into()));
        }
        check_range("exposure", self.exposure_ev_range)?;
        check_range("rotation", self.rotation_range)?;
        check_count_range("extra light count", self.extra_light_count_range)?;
        check_range("intensity", self.intensity_range)?;
        check_range("radius", self.radius_range)?;
        if self.intensity_range[0] < 0.0 || self.radius_range[0] < 0.0 {
            return Err(RandomizeError::InvalidSpec("light intensity and radius must be non-negative".into()));
        }
        if self.extra_light_count_range[1] > 0 && self.position_volume.is_empty() {
            return Err(RandomizeError::InvalidSpec("light position volume is empty".into()));
        }
        Ok(())
    }
}

/// Picks an environment uniformly, offsets its exposure and rotation, and
/// draws the extra point lights.
pub fn sample_lights(spec: &LightSpec, rng: &mut RandomStream) -> Result<(EnvironmentLight, Vec<PointLight>), RandomizeError> {
    spec.validate()?;
    let mut env = spec.env_catalog[rng.below(spec.env_catalog.len() as u64) as usize].clone();
    env.exposure_ev += rng.uniform_range(spec.exposure_ev_range);
    env.rotation_y += rng.uniform_range(spec.rotation_range);

    let count = rng.uniform_int(spec.extra_light_count_range[0] as u64, spec.extra_light_count_range[1] as u64);
    let v = &spec.position_volume;
    let lights = (0..count)
        .map(|_| {
            let position = Vec3::new(
                rng.uniform(v.min.x, v.max.x),
                rng.uniform(v.min.y, v.max.y),
                rng.uniform(v.min.z, v.max.z),
            );
            let i = rng.uniform_range(spec.intensity_range);
            PointLight {
                position,
                intensity: [i; 3],
                radius: rng.uniform_range(spec.radius_range),
            }
        })
        .collect();
    Ok((env, lights))
}
