use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate view: eye and target coincide")]
    DegenerateView,
    #[error("point is behind the camera (z = {z})")]
    BehindCamera { z: f64 },
    #[error("rotation is not orthonormal with det +1 (max deviation {deviation:e})")]
    NotRigid { deviation: f64 },
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: polygon with {vertices} vertices is not convex and cannot be fan-triangulated")]
    NonConvexFace { line: usize, vertices: usize },
    #[error("unsupported mesh format for {0}")]
    UnsupportedFormat(PathBuf),
    #[error("invalid mesh: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum TextureError {
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("invalid texture: {0}")]
    Invalid(String),
}
