//! Dataset generation: configuration, per-frame orchestration from scene
//! randomization to BOP export, and the digital-twin re-render.

pub mod assets;
pub mod config;
pub mod generate;
pub mod twin;

use std::path::PathBuf;

pub use assets::Assets;
pub use config::{validate_config, ConfigError, DatasetConfig};
pub use generate::{build_scene, default_workers, run_generate, sample_frame, synthesize_materials, RunReport, WORKERS_ENV};
pub use twin::{run_import_digital_twin, TwinOptions};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Asset(String),
    #[error("frame {index}, stage {stage}: {message}")]
    Frame { index: u64, stage: &'static str, message: String },
    #[error(transparent)]
    Bop(#[from] partsynth_bop::BopError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn frame(index: u64, stage: &'static str, e: impl std::fmt::Display) -> Self {
        Self::Frame {
            index,
            stage,
            message: e.to_string(),
        }
    }

    /// 1 for configuration problems, 2 for everything that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            _ => 2,
        }
    }
}
