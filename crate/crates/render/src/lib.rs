//! Image synthesis: a path tracer for the photorealistic profile and a
//! direct-lighting preview, both producing instance-id and depth buffers
//! from the unjittered pixel-center ray.

pub mod brdf;
pub mod bvh;
pub mod frame;
pub mod post;
pub mod profile;
pub mod tracer;

pub use bvh::{Bvh, BvhTriangle, Hit};
pub use frame::{render_frame, render_prepared, FrameBuffers};
pub use post::{display_pixel, post_process};
pub use profile::{RenderMode, RenderProfile, Tonemap};
pub use tracer::{RenderScene, SceneHit};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("invalid render profile: {0}")]
    InvalidProfile(String),
    #[error("every sample of pixel ({x}, {y}) was non-finite")]
    AllSamplesRejected { x: u32, y: u32 },
}
