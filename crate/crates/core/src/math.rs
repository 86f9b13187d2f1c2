//! Rigid transforms, spherical coordinates and axis-aligned boxes.

use crate::error::GeometryError;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Maximum deviation of `R·Rᵀ` from identity (and of `det R` from 1)
/// accepted for a rigid rotation.
pub const RIGID_TOLERANCE: f64 = 1e-6;

/// Rotation followed by translation: `x ↦ R·x + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Builds a transform, rejecting rotations that are not proper and orthonormal.
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, GeometryError> {
        let deviation = rotation_deviation(&rotation);
        if deviation > RIGID_TOLERANCE || !translation.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NotRigid { deviation });
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation,
        }
    }

    /// Builds a transform from a row-major rotation as stored in BOP files.
    pub fn from_row_major(rotation: &[f64; 9], translation: [f64; 3]) -> Result<Self, GeometryError> {
        Self::new(Mat3::from_row_slice(rotation), Vec3::from(translation))
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn rotation_row_major(&self) -> [f64; 9] {
        let r = &self.rotation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
        ]
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Returns a copy moved by `offset` in the output frame.
    pub fn translated(&self, offset: &Vec3) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation,
            translation: self.translation + offset,
        }
    }

    pub fn is_rigid(&self, tolerance: f64) -> bool {
        rotation_deviation(&self.rotation) <= tolerance
    }
}

/// Largest of `|R·Rᵀ − I|` (entrywise) and `|det R − 1|`.
pub fn rotation_deviation(r: &Mat3) -> f64 {
    if !r.iter().all(|v| v.is_finite()) {
        return f64::INFINITY;
    }
    let ortho = (r * r.transpose() - Mat3::identity()).amax();
    ortho.max((r.determinant() - 1.0).abs())
}

/// Point at polar angle `theta` (from +Y), azimuth `phi` (in XZ from +X)
/// and distance `r` around `center`.
pub fn spherical_to_cartesian(theta: f64, phi: f64, r: f64, center: &Vec3) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    center + r * Vec3::new(st * cp, ct, st * sp)
}

/// World-to-camera transform for a camera at `eye` looking at `target`.
///
/// Camera +Z points at the target and camera +Y follows `up_hint`
/// projected onto the image plane. When `up_hint` is parallel to the view
/// direction, (0, 0, 1) is used instead.
pub fn look_at(eye: &Vec3, target: &Vec3, up_hint: &Vec3) -> Result<RigidTransform, GeometryError> {
    let view = target - eye;
    let dist = view.norm();
    if !(dist > 0.0) || !dist.is_finite() {
        return Err(GeometryError::DegenerateView);
    }
    let forward = view / dist;

    let mut up = *up_hint;
    if up.cross(&forward).norm() <= 1e-9 * up.norm().max(1e-300) {
        up = Vec3::new(0.0, 0.0, 1.0);
    }
    let y_axis = (up - forward * up.dot(&forward)).normalize();
    let x_axis = y_axis.cross(&forward);

    let rotation = Mat3::from_rows(&[
        x_axis.transpose(),
        y_axis.transpose(),
        forward.transpose(),
    ]);
    let translation = -(rotation * eye);
    RigidTransform::new(rotation, translation)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub dir: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, dir: Vec3) -> Self {
        Self { origin, dir }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= other.min[k] && other.max[k] <= self.max[k])
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] < other.max[k] && other.min[k] < self.max[k])
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    /// Slab test; returns the entry distance when the ray overlaps `[t_min, t_max]`.
    #[inline]
    pub fn hit(&self, origin: &Vec3, inv_dir: &Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let mut lo = t_min;
        let mut hi = t_max;
        for k in 0..3 {
            let t0 = (self.min[k] - origin[k]) * inv_dir[k];
            let t1 = (self.max[k] - origin[k]) * inv_dir[k];
            let (near, far) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            // NaN (0 · ∞) leaves the bounds untouched.
            if near > lo {
                lo = near;
            }
            if far < hi {
                hi = far;
            }
            if lo > hi {
                return None;
            }
        }
        Some(lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn spherical_pole_and_equator() {
        let p = spherical_to_cartesian(0.0, 1.234, 2.0, &Vec3::zeros());
        assert!((p - Vec3::new(0.0, 2.0, 0.0)).norm() < 1e-12);
        let p = spherical_to_cartesian(FRAC_PI_2, 0.0, 1.0, &Vec3::new(1.0, 0.0, 0.0));
        assert!((p - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn spherical_radius_monte_carlo() {
        let mut rng = crate::RandomStream::new(7);
        let center = Vec3::new(0.3, -1.0, 2.0);
        for _ in 0..10_000 {
            let theta = rng.uniform(0.0, PI);
            let phi = rng.uniform(-PI, PI);
            let r = rng.uniform(0.1, 10.0);
            let p = spherical_to_cartesian(theta, phi, r, &center);
            assert!(((p - center).norm() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn look_at_canonical_frame() {
        let t = look_at(&Vec3::new(0.0, 0.0, -1.0), &Vec3::zeros(), &Vec3::y()).unwrap();
        assert!((t.rotation() - Mat3::identity()).amax() < 1e-12);
        assert!((t.translation() - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn look_at_from_above_uses_fallback_up() {
        let t = look_at(&Vec3::new(0.0, 5.0, 0.0), &Vec3::zeros(), &Vec3::y()).unwrap();
        let o = t.transform_point(&Vec3::zeros());
        assert!((o - Vec3::new(0.0, 0.0, 5.0)).norm() < 1e-12);
        assert!(t.is_rigid(RIGID_TOLERANCE));
    }

    #[test]
    fn look_at_degenerate() {
        let e = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(look_at(&e, &e, &Vec3::y()), Err(GeometryError::DegenerateView));
    }

    #[test]
    fn look_at_random_pairs_center_target() {
        let mut rng = crate::RandomStream::new(11);
        for _ in 0..1000 {
            let eye = Vec3::new(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
            let target = Vec3::new(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
            let t = look_at(&eye, &target, &Vec3::y()).unwrap();
            let c = t.transform_point(&target);
            assert!(c.x.abs() < 1e-9 && c.y.abs() < 1e-9);
            assert!((c.z - (eye - target).norm()).abs() < 1e-9);
            assert!(t.is_rigid(RIGID_TOLERANCE));
        }
    }

    #[test]
    fn non_rigid_rejected() {
        let m = Mat3::new(1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0);
        assert!(RigidTransform::new(m, Vec3::zeros()).is_err());
        let mirror = Mat3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(RigidTransform::new(mirror, Vec3::zeros()).is_err());
    }

    #[test]
    fn compose_and_inverse() {
        let a = look_at(&Vec3::new(1.0, 2.0, 3.0), &Vec3::new(0.5, 0.0, -1.0), &Vec3::y()).unwrap();
        let id = a.compose(&a.inverse());
        assert!((id.rotation() - Mat3::identity()).amax() < 1e-12);
        assert!(id.translation().norm() < 1e-12);
    }

    #[test]
    fn aabb_ray_hit() {
        let b = Aabb::new(Vec3::repeat(-1.0), Vec3::repeat(1.0));
        let o = Vec3::new(0.0, 0.0, -5.0);
        let d = Vec3::new(0.0, 0.0, 1.0);
        let inv = d.map(|v| 1.0 / v);
        assert_eq!(b.hit(&o, &inv, 0.0, f64::INFINITY), Some(4.0));
        let o2 = Vec3::new(2.0, 0.0, -5.0);
        assert_eq!(b.hit(&o2, &inv, 0.0, f64::INFINITY), None);
    }
}
