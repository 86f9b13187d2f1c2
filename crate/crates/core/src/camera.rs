//! Pinhole camera model.
//!
//! Pixel coordinates follow the OpenCV/BOP convention: integer coordinates
//! are pixel centers, the origin is the top-left pixel and `v` grows
//! downward.

use crate::error::GeometryError;
use crate::math::{Mat3, Ray, RigidTransform, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self, GeometryError> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    /// Square pixels, principal point at the image center, given horizontal field of view.
    pub fn from_fov(width: u32, height: u32, horizontal_fov: f64) -> Result<Self, GeometryError> {
        let f = 0.5 * width as f64 / (0.5 * horizontal_fov).tan();
        Self::new(
            f,
            f,
            (width as f64 - 1.0) * 0.5,
            (height as f64 - 1.0) * 0.5,
            width,
            height,
        )
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let err = |m: &str| Err(GeometryError::InvalidIntrinsics(m.to_string()));
        if !(self.fx > 0.0 && self.fy > 0.0) || !self.fx.is_finite() || !self.fy.is_finite() {
            return err("focal lengths must be positive and finite");
        }
        if self.width == 0 || self.height == 0 {
            return err("image size must be non-zero");
        }
        if !(0.0 <= self.cx && self.cx < self.width as f64) {
            return err("cx must lie in [0, width)");
        }
        if !(0.0 <= self.cy && self.cy < self.height as f64) {
            return err("cy must lie in [0, height)");
        }
        Ok(())
    }

    /// `K` as a 3×3 matrix.
    pub fn matrix(&self) -> Mat3 {
        Mat3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// Row-major `K` as stored in BOP `cam_K`.
    pub fn matrix_row_major(&self) -> [f64; 9] {
        [self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0]
    }

    pub fn project_point(&self, cam_point: &Vec3) -> Result<[f64; 2], GeometryError> {
        if !(cam_point.z > 0.0) {
            return Err(GeometryError::BehindCamera { z: cam_point.z });
        }
        Ok([
            self.fx * cam_point.x / cam_point.z + self.cx,
            self.fy * cam_point.y / cam_point.z + self.cy,
        ])
    }

    /// Unit camera-space direction through continuous pixel coordinate `(u, v)`.
    pub fn pixel_direction(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0).normalize()
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// Intrinsics plus world-to-camera extrinsics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub intrinsics: CameraIntrinsics,
    pub world_to_camera: RigidTransform,
}

impl Camera {
    pub fn new(intrinsics: CameraIntrinsics, world_to_camera: RigidTransform) -> Self {
        Self {
            intrinsics,
            world_to_camera,
        }
    }

    pub fn position(&self) -> Vec3 {
        self.world_to_camera.inverse().translation().to_owned()
    }

    /// World-space ray through `(u, v)`. The direction is unit length and
    /// its camera-space z component is returned alongside, so that
    /// `depth = t · z_scale`.
    pub fn ray(&self, u: f64, v: f64) -> (Ray, f64) {
        let d_cam = self.intrinsics.pixel_direction(u, v);
        let r_t = self.world_to_camera.rotation().transpose();
        let origin = -(r_t * self.world_to_camera.translation());
        (Ray::new(origin, r_t * d_cam), d_cam.z)
    }

    /// Projects a world-space point to pixel coordinates.
    pub fn project_world(&self, p: &Vec3) -> Result<[f64; 2], GeometryError> {
        self.intrinsics.project_point(&self.world_to_camera.transform_point(p))
    }
}
