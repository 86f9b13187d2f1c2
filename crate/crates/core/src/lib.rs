//! Shared domain model for the synthetic dataset generator.
//!
//! Everything here is immutable after construction and safe to share
//! across threads. World space is Y-up and in meters; cameras look along
//! their own +Z axis and image coordinates start top-left with `v` growing
//! downward.

pub mod camera;
pub mod error;
pub mod light;
pub mod material;
pub mod math;
pub mod mesh;
pub mod mesh_io;
pub mod rng;
pub mod scene;
pub mod texture;

pub use camera::{Camera, CameraIntrinsics};
pub use error::{GeometryError, MeshError, TextureError};
pub use light::{EnvironmentLight, PointLight};
pub use material::MaterialMaps;
pub use math::{look_at, spherical_to_cartesian, Aabb, Mat3, Ray, RigidTransform, Vec3};
pub use mesh::Mesh;
pub use mesh_io::{load_mesh, MeshFormat};
pub use rng::RandomStream;
pub use scene::{Instance, Scene};
pub use texture::{ColorSpace, TextureMap, Wrap};
