use std::f64::consts::PI;

use partsynth_core::math::{look_at, spherical_to_cartesian, Mat3, RigidTransform, Vec3};
use partsynth_core::rng::RandomStream;

use crate::{check_range, RandomizeError};

/// Camera positions on a spherical shell around `target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraRangeSpec {
    pub theta_range: [f64; 2],
    pub phi_range: [f64; 2],
    pub r_range: [f64; 2],
    pub target: Vec3,
}

impl CameraRangeSpec {
    pub fn validate(&self) -> Result<(), RandomizeError> {
        check_range("theta", self.theta_range)?;
        check_range("phi", self.phi_range)?;
        check_range("r", self.r_range)?;
        if self.theta_range[0] < 0.0 || self.theta_range[1] > PI {
            return Err(RandomizeError::InvalidSpec("theta range must lie within [0, pi]".into()));
        }
        if self.r_range[0] <= 0.0 {
            return Err(RandomizeError::InvalidSpec("camera distance must be positive".into()));
        }
        Ok(())
    }
}

/// Draws θ, φ and r uniformly and aims the camera at the target with +Y up.
/// Returns the world-to-camera transform and the eye position.
pub fn sample_camera_pose(spec: &CameraRangeSpec, rng: &mut RandomStream) -> Result<(RigidTransform, Vec3), RandomizeError> {
    spec.validate()?;
    let theta = rng.uniform_range(spec.theta_range);
    let phi = rng.uniform_range(spec.phi_range);
    let r = rng.uniform_range(spec.r_range);
    let eye = spherical_to_cartesian(theta, phi, r, &spec.target);
    let pose = look_at(&eye, &spec.target, &Vec3::y())?;
    Ok((pose, eye))
}

/// Rotation uniformly distributed on SO(3), built from a uniform unit
/// quaternion (Shoemake's subgroup construction).
pub fn sample_uniform_rotation(rng: &mut RandomStream) -> Mat3 {
    let u1 = rng.next_f64();
    let u2 = 2.0 * PI * rng.next_f64();
    let u3 = 2.0 * PI * rng.next_f64();
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let (w, x, y, z) = (a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos());
    Mat3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - z * w),
        2.0 * (x * z + y * w),
        2.0 * (x * y + z * w),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - x * w),
        2.0 * (x * z - y * w),
        2.0 * (y * z + x * w),
        1.0 - 2.0 * (x * x + y * y),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use partsynth_core::math::rotation_deviation;

    #[test]
    fn collapsed_ranges_give_fixed_eye() {
        let spec = CameraRangeSpec {
            theta_range: [PI / 4.0; 2],
            phi_range: [0.0; 2],
            r_range: [2.0; 2],
            target: Vec3::zeros(),
        };
        let (pose, eye) = sample_camera_pose(&spec, &mut RandomStream::new(1)).unwrap();
        assert!((eye - Vec3::new(1.41421, 1.41421, 0.0)).norm() < 1e-5);
        // The target sits on the optical axis.
        let t = pose.transform_point(&Vec3::zeros());
        assert!(t.x.abs() < 1e-12 && t.y.abs() < 1e-12 && (t.z - 2.0).abs() < 1e-12);
    }

    #[test]
    fn theta_samples_stay_in_range() {
        let spec = CameraRangeSpec {
            theta_range: [0.2, 0.3],
            phi_range: [0.0, 2.0 * PI],
            r_range: [1.0, 2.0],
            target: Vec3::new(0.1, 0.0, 0.3),
        };
        let mut rng = RandomStream::new(77);
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let (_, eye) = sample_camera_pose(&spec, &mut rng).unwrap();
            let d = eye - spec.target;
            let theta = (d.y / d.norm()).acos();
            assert!((0.2 - 1e-9..=0.3 + 1e-9).contains(&theta));
            assert!((1.0 - 1e-9..=2.0 + 1e-9).contains(&d.norm()));
            sum += theta;
        }
        let mean = sum / 10_000.0;
        assert!((0.248..=0.252).contains(&mean), "{mean}");
    }

    #[test]
    fn pose_is_reproducible() {
        let spec = CameraRangeSpec {
            theta_range: [0.1, 1.4],
            phi_range: [-PI, PI],
            r_range: [0.5, 1.5],
            target: Vec3::zeros(),
        };
        let a = sample_camera_pose(&spec, &mut RandomStream::with_path(5, &[12])).unwrap();
        let b = sample_camera_pose(&spec, &mut RandomStream::with_path(5, &[12])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = CameraRangeSpec {
            theta_range: [0.3, 0.2],
            phi_range: [0.0, 1.0],
            r_range: [1.0, 2.0],
            target: Vec3::zeros(),
        };
        assert!(spec.validate().is_err());
        spec.theta_range = [0.0, 4.0];
        assert!(spec.validate().is_err());
        spec.theta_range = [0.0, 1.0];
        spec.r_range = [0.0, 1.0];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn rotations_are_orthonormal_and_isotropic() {
        let mut rng = RandomStream::new(3);
        let mut mean = Vec3::zeros();
        let n = 100_000;
        for _ in 0..n {
            let r = sample_uniform_rotation(&mut rng);
            assert!(rotation_deviation(&r) < 1e-9);
            mean += r * Vec3::z();
        }
        mean /= n as f64;
        assert!(mean.amax() < 0.01, "{mean:?}");
        assert_eq!(
            sample_uniform_rotation(&mut RandomStream::new(4)),
            sample_uniform_rotation(&mut RandomStream::new(4))
        );
    }
}
