//! Material variation: simplex-noise defect generators (rust, scratches,
//! polishing lines), HSV offsets and a parallel exemplar resampler that
//! rearranges texels of an input texture into a new, seam-reduced texture.

pub mod defects;
pub mod hsv;
pub mod noise;
pub mod resample;

pub use defects::{apply_polish_lines, apply_rust, apply_scratch_segments, apply_scratches, defect_mask, Scratch};
pub use hsv::hsv_shift;
pub use noise::{fbm, simplex2, NoiseParams, SimplexNoise};
pub use resample::{
    neighborhood_difference, resample, resample_init, resample_init_with_offsets, resample_iterate,
    resample_material, RadiusSchedule, ResampleConfig, ResampleState,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TexsynthError {
    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),
    #[error("invalid resampler input: {0}")]
    InvalidResample(String),
}
