use std::sync::Arc;

use partsynth_core::material::MaterialMaps;
use partsynth_core::rng::RandomStream;
use partsynth_texsynth::resample::{RadiusSchedule, ResampleConfig};
use partsynth_texsynth::{
    apply_polish_lines, apply_rust, apply_scratches, defect_mask, hsv_shift, resample_material, NoiseParams,
};
use serde::{Deserialize, Serialize};

use crate::{check_count_range, check_range, RandomizeError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HsvRanges {
    /// Degrees.
    pub h: [f64; 2],
    pub s: [f64; 2],
    pub v: [f64; 2],
}

impl Default for HsvRanges {
    fn default() -> Self {
        Self {
            h: [-10.0, 10.0],
            s: [-0.05, 0.05],
            v: [-0.05, 0.05],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefectProbabilities {
    pub rust: f64,
    pub scratches: f64,
    pub polish: f64,
    pub resample: f64,
}

impl Default for DefectProbabilities {
    fn default() -> Self {
        Self {
            rust: 0.2,
            scratches: 0.3,
            polish: 0.3,
            resample: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RustRanges {
    pub threshold: [f64; 2],
    /// Noise cycles per UV unit.
    pub frequency: [f64; 2],
    /// Linear RGB end points of the rust color.
    pub color_a: [f64; 3],
    pub color_b: [f64; 3],
}

impl Default for RustRanges {
    fn default() -> Self {
        Self {
            threshold: [0.2, 0.6],
            frequency: [2.0, 6.0],
            color_a: [0.30, 0.11, 0.04],
            color_b: [0.12, 0.05, 0.02],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScratchRanges {
    pub count: [u32; 2],
    pub width_px: [f64; 2],
    pub depth: [f64; 2],
}

impl Default for ScratchRanges {
    fn default() -> Self {
        Self {
            count: [1, 8],
            width_px: [1.0, 3.0],
            depth: [0.1, 0.5],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolishRanges {
    /// Radians in UV space.
    pub direction: [f64; 2],
    pub anisotropy: [f64; 2],
    pub frequency: [f64; 2],
    pub strength: [f64; 2],
}

impl Default for PolishRanges {
    fn default() -> Self {
        Self {
            direction: [0.0, std::f64::consts::PI],
            anisotropy: [4.0, 16.0],
            frequency: [4.0, 12.0],
            strength: [0.05, 0.2],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResampleRanges {
    pub iterations: u32,
    pub patch_size: u32,
    pub radius0: u32,
}

impl Default for ResampleRanges {
    fn default() -> Self {
        let c = ResampleConfig::default();
        let radius0 = match c.schedule {
            RadiusSchedule::Geometric { radius0 } => radius0,
            RadiusSchedule::Fixed(r) => r,
        };
        Self {
            iterations: c.iterations,
            patch_size: c.patch_size,
            radius0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefectRanges {
    pub rust: RustRanges,
    pub scratches: ScratchRanges,
    pub polish: PolishRanges,
    pub resample: ResampleRanges,
}

#[derive(Clone, Debug)]
pub struct MaterialSpec {
    pub material_catalog: Vec<Arc<MaterialMaps>>,
    pub hsv_offset_ranges: HsvRanges,
    pub defect_probabilities: DefectProbabilities,
    pub defect_parameter_ranges: DefectRanges,
}

impl MaterialSpec {
    pub fn validate(&self) -> Result<(), RandomizeError> {
        if self.material_catalog.is_empty() {
            return Err(RandomizeError::InvalidSpec("material catalog is empty".into()));
        }
        let p = &self.defect_probabilities;
        for (name, v) in [("rust", p.rust), ("scratches", p.scratches), ("polish", p.polish), ("resample", p.resample)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(RandomizeError::InvalidSpec(format!("{name} probability {v} outside [0, 1]")));
            }
        }
        let h = &self.hsv_offset_ranges;
        check_range("hue offset", h.h)?;
        check_range("saturation offset", h.s)?;
        check_range("value offset", h.v)?;
        let d = &self.defect_parameter_ranges;
        check_range("rust threshold", d.rust.threshold)?;
        check_range("rust frequency", d.rust.frequency)?;
        check_count_range("scratch count", d.scratches.count)?;
        check_range("scratch width", d.scratches.width_px)?;
        check_range("scratch depth", d.scratches.depth)?;
        check_range("polish direction", d.polish.direction)?;
        check_range("polish anisotropy", d.polish.anisotropy)?;
        check_range("polish frequency", d.polish.frequency)?;
        check_range("polish strength", d.polish.strength)?;
        if d.rust.frequency[0] <= 0.0 || d.polish.frequency[0] <= 0.0 {
            return Err(RandomizeError::InvalidSpec("noise frequencies must be positive".into()));
        }
        if d.polish.anisotropy[0] < 1.0 {
            return Err(RandomizeError::InvalidSpec("polish anisotropy must be at least 1".into()));
        }
        if d.scratches.depth[0] < 0.0 || d.scratches.depth[1] > 1.0 {
            return Err(RandomizeError::InvalidSpec("scratch depth must lie in [0, 1]".into()));
        }
        if d.resample.patch_size == 0 || d.resample.radius0 == 0 {
            return Err(RandomizeError::InvalidSpec("resample patch size and radius must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which generators ran for one instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AppliedDefects {
    pub rust: bool,
    pub scratches: bool,
    pub polish: bool,
    pub resample: bool,
}

#[derive(Clone, Debug)]
pub struct MaterialAssignment {
    pub catalog_index: usize,
    pub maps: Arc<MaterialMaps>,
    pub applied: AppliedDefects,
    pub hsv_offset: [f64; 3],
}

/// One material per instance: a uniformly chosen catalog entry, then each
/// generator with its own probability, then an HSV offset. Instance `i`
/// draws from `rng.derive(i)`, so instances are independent of each other.
/// Catalog entries are never modified; unmodified instances share them.
pub fn assign_materials(
    instance_count: usize,
    spec: &MaterialSpec,
    rng: &RandomStream,
) -> Result<Vec<MaterialAssignment>, RandomizeError> {
    spec.validate()?;
    (0..instance_count)
        .map(|i| assign_one(spec, &mut rng.derive(i as u64)))
        .collect()
}

fn assign_one(spec: &MaterialSpec, rng: &mut RandomStream) -> Result<MaterialAssignment, RandomizeError> {
    let catalog_index = rng.below(spec.material_catalog.len() as u64) as usize;
    let base = &spec.material_catalog[catalog_index];
    let p = &spec.defect_probabilities;
    let d = &spec.defect_parameter_ranges;
    let mut applied = AppliedDefects::default();
    let mut maps: Option<MaterialMaps> = None;
    let current = |maps: &Option<MaterialMaps>| maps.as_ref().unwrap_or(base).clone();

    if rng.bernoulli(p.resample) {
        let (w, h) = base.albedo.dimensions();
        let config = ResampleConfig {
            iterations: d.resample.iterations,
            patch_size: d.resample.patch_size,
            schedule: RadiusSchedule::Geometric { radius0: d.resample.radius0 },
        };
        let out = resample_material(base, w, h, &config, &mut rng.derive_tag("resample"))
            .map_err(|e| RandomizeError::InvalidSpec(e.to_string()))?;
        maps = Some(out);
        applied.resample = true;
    }
    if rng.bernoulli(p.rust) {
        let m = current(&maps);
        let (w, h) = m.albedo.dimensions();
        let mask_params = NoiseParams {
            seed: rng.next_raw(),
            frequency: rng.uniform_range(d.rust.frequency),
            threshold: rng.uniform_range(d.rust.threshold),
            ..NoiseParams::default()
        };
        let color_params = NoiseParams {
            seed: rng.next_raw(),
            frequency: mask_params.frequency * 2.0,
            ..NoiseParams::default()
        };
        let mask = defect_mask(w, h, &mask_params);
        maps = Some(apply_rust(&m, &mask, d.rust.color_a, d.rust.color_b, &color_params));
        applied.rust = true;
    }
    if rng.bernoulli(p.scratches) {
        let m = current(&maps);
        let count = rng.uniform_int(d.scratches.count[0] as u64, d.scratches.count[1] as u64) as u32;
        maps = Some(apply_scratches(
            &m,
            count,
            d.scratches.width_px,
            d.scratches.depth,
            &mut rng.derive_tag("scratches"),
        ));
        applied.scratches = true;
    }
    if rng.bernoulli(p.polish) {
        let m = current(&maps);
        let direction = rng.uniform_range(d.polish.direction);
        let anisotropy = rng.uniform_range(d.polish.anisotropy);
        let params = NoiseParams {
            seed: rng.next_raw(),
            frequency: rng.uniform_range(d.polish.frequency),
            ..NoiseParams::default()
        };
        let strength = rng.uniform_range(d.polish.strength);
        maps = Some(apply_polish_lines(&m, direction, anisotropy, &params, strength));
        applied.polish = true;
    }

    let h = &spec.hsv_offset_ranges;
    let hsv_offset = [rng.uniform_range(h.h), rng.uniform_range(h.s), rng.uniform_range(h.v)];
    if hsv_offset != [0.0; 3] {
        let mut m = current(&maps);
        m.albedo = hsv_shift(&m.albedo, hsv_offset[0], hsv_offset[1], hsv_offset[2]);
        maps = Some(m);
    }

    Ok(MaterialAssignment {
        catalog_index,
        maps: maps.map(Arc::new).unwrap_or_else(|| Arc::clone(base)),
        applied,
        hsv_offset,
    })
}
