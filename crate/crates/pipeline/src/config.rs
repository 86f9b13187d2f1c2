//! The dataset configuration: one JSON document. Relative paths resolve
//! against the directory of the config file.

use std::path::{Path, PathBuf};

use partsynth_randomize::{DefectProbabilities, DefectRanges, HsvRanges};
use partsynth_render::{RenderMode, RenderProfile, Tonemap};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub seed: u64,
    pub num_images: u32,
    /// `[width, height]` in pixels.
    pub resolution: [u32; 2],
    pub horizontal_fov_deg: f64,
    pub profile: ProfileConfig,
    pub camera: CameraConfig,
    pub spawn: SpawnConfig,
    pub lights: LightsConfig,
    pub materials: MaterialsConfig,
    pub output_root: PathBuf,
    pub scene_id: u32,
    /// Millimeters per stored depth unit.
    pub depth_scale: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_images: 1,
            resolution: [640, 480],
            horizontal_fov_deg: 60.0,
            profile: ProfileConfig::default(),
            camera: CameraConfig::default(),
            spawn: SpawnConfig::default(),
            lights: LightsConfig::default(),
            materials: MaterialsConfig::default(),
            output_root: PathBuf::from("output"),
            scene_id: 0,
            depth_scale: partsynth_bop::DEFAULT_DEPTH_SCALE,
        }
    }
}

/// Render settings. Unset fields take the defaults of the chosen mode.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileConfig {
    pub mode: Option<RenderMode>,
    pub spp: Option<u32>,
    pub max_depth: Option<u32>,
    pub rr_start_depth: Option<u32>,
    pub exposure_ev: Option<f64>,
    pub white_balance_gains: Option<[f64; 3]>,
    pub tonemap: Option<Tonemap>,
    pub gamma: Option<f64>,
}

impl ProfileConfig {
    pub fn resolve(&self) -> RenderProfile {
        let base = RenderProfile::for_mode(self.mode.unwrap_or(RenderMode::PathTraced));
        RenderProfile {
            mode: base.mode,
            spp: self.spp.unwrap_or(base.spp),
            max_depth: self.max_depth.unwrap_or(base.max_depth),
            rr_start_depth: self.rr_start_depth.unwrap_or(base.rr_start_depth),
            exposure_ev: self.exposure_ev.unwrap_or(base.exposure_ev),
            white_balance_gains: self.white_balance_gains.unwrap_or(base.white_balance_gains),
            tonemap: self.tonemap.unwrap_or(base.tonemap),
            gamma: self.gamma.unwrap_or(base.gamma),
        }
    }
}

/// Camera on a spherical shell around `target`. θ is measured from +Y.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub theta_deg: [f64; 2],
    pub phi_deg: [f64; 2],
    pub r: [f64; 2],
    pub target: [f64; 3],
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            theta_deg: [20.0, 60.0],
            phi_deg: [0.0, 360.0],
            r: [0.6, 1.0],
            target: [0.0; 3],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxConfig {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    M,
    Mm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpawnConfig {
    /// OBJ or PLY files. Model `i` gets `obj_id` `i + 1`.
    pub models: Vec<PathBuf>,
    pub model_units: Units,
    pub volume: BoxConfig,
    pub count_range: [u32; 2],
    pub unique_models: bool,
    pub rest_on_plane: bool,
    /// Render the support plane under the objects.
    pub support_plane: bool,
    pub plane_y: f64,
    pub max_placement_attempts: u32,
}

impl Default for SpawnConfig {
    fn default() -> Self {
        Self {
            models: Vec::new(),
            model_units: Units::M,
            volume: BoxConfig {
                min: [-0.2, 0.0, -0.2],
                max: [0.2, 0.1, 0.2],
            },
            count_range: [1, 3],
            unique_models: false,
            rest_on_plane: true,
            support_plane: true,
            plane_y: 0.0,
            max_placement_attempts: 50,
        }
    }
}

/// An environment: a 2:1 equirectangular `.hdr` file or constant radiance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvironmentSource {
    File(PathBuf),
    Constant { constant: [f32; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LightsConfig {
    pub environments: Vec<EnvironmentSource>,
    pub exposure_ev: [f64; 2],
    pub rotation_deg: [f64; 2],
    pub extra_light_count: [u32; 2],
    /// W/sr.
    pub intensity: [f64; 2],
    pub radius: [f64; 2],
    pub position_volume: BoxConfig,
}

impl Default for LightsConfig {
    fn default() -> Self {
        Self {
            environments: Vec::new(),
            exposure_ev: [-1.0, 1.0],
            rotation_deg: [0.0, 360.0],
            extra_light_count: [0, 2],
            intensity: [0.5, 5.0],
            radius: [0.01, 0.05],
            position_volume: BoxConfig {
                min: [-1.0, 1.0, -1.0],
                max: [1.0, 2.0, 1.0],
            },
        }
    }
}

/// A material: a texture-set directory or uniform values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialSource {
    Directory(PathBuf),
    Uniform { albedo: [f32; 3], roughness: f32, metallic: f32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaterialsConfig {
    /// Empty means a single grey dielectric.
    pub catalog: Vec<MaterialSource>,
    /// Uniform materials are expanded to this square size so that defects
    /// have texels to work on.
    pub uniform_texture_size: u32,
    pub hsv_offset_ranges: HsvRanges,
    pub defect_probabilities: DefectProbabilities,
    pub defect_parameter_ranges: DefectRanges,
}

impl Default for MaterialsConfig {
    fn default() -> Self {
        Self {
            catalog: Vec::new(),
            uniform_texture_size: 128,
            hsv_offset_ranges: HsvRanges::default(),
            defect_probabilities: DefectProbabilities::default(),
            defect_parameter_ranges: DefectRanges::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: at `{key}`: {message}")]
    Parse { path: PathBuf, key: String, message: String },
    #[error("{path}: {} problem(s):\n  {}", .problems.len(), .problems.join("\n  "))]
    Invalid { path: PathBuf, problems: Vec<String> },
}

/// Parses, resolves paths and validates. Every problem found is reported,
/// unknown keys and missing assets included.
pub fn validate_config(path: &Path) -> Result<DatasetConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let (config, unknown) = parse_config(&text).map_err(|(key, message)| ConfigError::Parse {
        path: path.to_path_buf(),
        key,
        message,
    })?;
    let config = config.resolve_paths(base);
    let mut problems: Vec<String> = unknown.into_iter().map(|k| format!("{k}: unknown key")).collect();
    problems.extend(config.problems());
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid {
            path: path.to_path_buf(),
            problems,
        })
    }
}

/// Parses a config document, returning it together with the paths of all
/// keys that were not recognized.
pub fn parse_config(text: &str) -> Result<(DatasetConfig, Vec<String>), (String, String)> {
    let mut unknown = Vec::new();
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut track = serde_path_to_error::Track::new();
    let result: Result<DatasetConfig, serde_json::Error> =
        serde_ignored::deserialize(serde_path_to_error::Deserializer::new(de, &mut track), |p| unknown.push(p.to_string()));
    match result {
        Ok(config) => Ok((config, unknown)),
        Err(e) => Err((track.path().to_string(), e.to_string())),
    }
}

impl DatasetConfig {
    /// Makes every relative asset path absolute with respect to `base`.
    pub fn resolve_paths(mut self, base: &Path) -> Self {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.spawn.models.iter_mut().for_each(fix);
        for e in &mut self.lights.environments {
            if let EnvironmentSource::File(p) = e {
                fix(p);
            }
        }
        for m in &mut self.materials.catalog {
            if let MaterialSource::Directory(p) = m {
                fix(p);
            }
        }
        fix(&mut self.output_root);
        self
    }

    pub fn profile(&self) -> RenderProfile {
        self.profile.resolve()
    }

    /// All validation problems, each naming the offending field.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut ordered = |name: &str, r: [f64; 2]| {
            if !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1] {
                out.push(format!("{name}: range [{}, {}] is not ordered", r[0], r[1]));
            }
        };
        ordered("camera.theta_deg", self.camera.theta_deg);
        ordered("camera.phi_deg", self.camera.phi_deg);
        ordered("camera.r", self.camera.r);
        ordered("lights.exposure_ev", self.lights.exposure_ev);
        ordered("lights.rotation_deg", self.lights.rotation_deg);
        ordered("lights.intensity", self.lights.intensity);
        ordered("lights.radius", self.lights.radius);
        let h = &self.materials.hsv_offset_ranges;
        ordered("materials.hsv_offset_ranges.h", h.h);
        ordered("materials.hsv_offset_ranges.s", h.s);
        ordered("materials.hsv_offset_ranges.v", h.v);
        let d = &self.materials.defect_parameter_ranges;
        ordered("materials.defect_parameter_ranges.rust.threshold", d.rust.threshold);
        ordered("materials.defect_parameter_ranges.rust.frequency", d.rust.frequency);
        ordered("materials.defect_parameter_ranges.scratches.width_px", d.scratches.width_px);
        ordered("materials.defect_parameter_ranges.scratches.depth", d.scratches.depth);
        ordered("materials.defect_parameter_ranges.polish.direction", d.polish.direction);
        ordered("materials.defect_parameter_ranges.polish.anisotropy", d.polish.anisotropy);
        ordered("materials.defect_parameter_ranges.polish.frequency", d.polish.frequency);
        ordered("materials.defect_parameter_ranges.polish.strength", d.polish.strength);
        for (name, b) in [("spawn.volume", &self.spawn.volume), ("lights.position_volume", &self.lights.position_volume)] {
            for k in 0..3 {
                ordered(&format!("{name}[{k}]"), [b.min[k], b.max[k]]);
            }
        }
        for (name, r) in [
            ("spawn.count_range", self.spawn.count_range),
            ("lights.extra_light_count", self.lights.extra_light_count),
            ("materials.defect_parameter_ranges.scratches.count", d.scratches.count),
        ] {
            if r[0] > r[1] {
                out.push(format!("{name}: range [{}, {}] is not ordered", r[0], r[1]));
            }
        }

        if self.num_images == 0 {
            out.push("num_images: must be at least 1".into());
        }
        if self.resolution[0] == 0 || self.resolution[1] == 0 {
            out.push(format!("resolution: {:?} has a zero side", self.resolution));
        }
        if !(self.horizontal_fov_deg > 0.0 && self.horizontal_fov_deg < 180.0) {
            out.push(format!("horizontal_fov_deg: {} outside (0, 180)", self.horizontal_fov_deg));
        }
        if !(self.depth_scale > 0.0) {
            out.push(format!("depth_scale: {} must be positive", self.depth_scale));
        }
        if let Err(e) = self.profile().validate() {
            out.push(format!("profile: {e}"));
        }
        if self.camera.theta_deg[0] < 0.0 || self.camera.theta_deg[1] > 180.0 {
            out.push("camera.theta_deg: must lie within [0, 180]".into());
        }
        if self.camera.r[0] <= 0.0 {
            out.push("camera.r: distance must be positive".into());
        }
        if self.spawn.models.is_empty() {
            out.push("spawn.models: at least one model is required".into());
        }
        if self.spawn.unique_models && self.spawn.count_range[1] as usize > self.spawn.models.len() {
            out.push(format!(
                "spawn.count_range: {} unique models requested from {} models",
                self.spawn.count_range[1],
                self.spawn.models.len()
            ));
        }
        if self.spawn.max_placement_attempts == 0 {
            out.push("spawn.max_placement_attempts: must be at least 1".into());
        }
        if self.lights.environments.is_empty() {
            out.push("lights.environments: at least one environment is required".into());
        }
        if self.lights.intensity[0] < 0.0 || self.lights.radius[0] < 0.0 {
            out.push("lights: intensity and radius must be non-negative".into());
        }
        let p = &self.materials.defect_probabilities;
        for (name, v) in [("rust", p.rust), ("scratches", p.scratches), ("polish", p.polish), ("resample", p.resample)] {
            if !(0.0..=1.0).contains(&v) {
                out.push(format!("materials.defect_probabilities.{name}: {v} outside [0, 1]"));
            }
        }
        if self.materials.uniform_texture_size == 0 {
            out.push("materials.uniform_texture_size: must be at least 1".into());
        }

        let mut missing = |p: &Path, what: &str| {
            if !p.exists() {
                out.push(format!("{what}: {} does not exist", p.display()));
            }
        };
        for m in &self.spawn.models {
            missing(m, "spawn.models");
        }
        for e in &self.lights.environments {
            if let EnvironmentSource::File(p) = e {
                missing(p, "lights.environments");
            }
        }
        for m in &self.materials.catalog {
            if let MaterialSource::Directory(p) = m {
                missing(p, "materials.catalog");
            }
        }
        out
    }
}
