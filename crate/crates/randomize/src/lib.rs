//! Per-frame scene randomization.
//!
//! Every sampler draws from a [`RandomStream`] that the caller derives from
//! `(seed, frame index, purpose)`, so a frame can be regenerated on its own
//! and thread scheduling never changes sampled values.
//!
//! [`RandomStream`]: partsynth_core::RandomStream

pub mod camera;
pub mod lights;
pub mod materials;
pub mod spawn;

pub use camera::{sample_camera_pose, sample_uniform_rotation, CameraRangeSpec};
pub use lights::{sample_lights, LightSpec};
pub use materials::{
    assign_materials, AppliedDefects, DefectProbabilities, DefectRanges, HsvRanges, MaterialAssignment, MaterialSpec,
    PolishRanges, ResampleRanges, RustRanges, ScratchRanges,
};
pub use spawn::{spawn_objects, Placement, SpawnSpec};

use partsynth_core::GeometryError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RandomizeError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub(crate) fn check_range(name: &str, r: [f64; 2]) -> Result<(), RandomizeError> {
    if !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1] {
        return Err(RandomizeError::InvalidSpec(format!("{name} range [{}, {}] is not ordered", r[0], r[1])));
    }
    Ok(())
}

pub(crate) fn check_count_range(name: &str, r: [u32; 2]) -> Result<(), RandomizeError> {
    if r[0] > r[1] {
        return Err(RandomizeError::InvalidSpec(format!("{name} range [{}, {}] is not ordered", r[0], r[1])));
    }
    Ok(())
}
