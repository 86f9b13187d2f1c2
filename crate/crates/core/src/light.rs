use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::TextureError;
use crate::math::Vec3;
use crate::texture::{ColorSpace, TextureMap};

/// Equirectangular HDR environment.
///
/// Texture coordinate `(u, v)` maps to polar angle `θ = π·v` from +Y and
/// azimuth `φ = 2π·u` from +X toward +Z, before the map is rotated by
/// `rotation_y` about the Y axis (a feature at azimuth `φ` moves to `φ + rotation_y`). Radiance is scaled by `2^exposure_ev`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentLight {
    pub image: Arc<TextureMap>,
    pub rotation_y: f64,
    pub exposure_ev: f64,
}

impl EnvironmentLight {
    pub fn new(image: Arc<TextureMap>, rotation_y: f64, exposure_ev: f64) -> Result<Self, TextureError> {
        if image.width() != 2 * image.height() {
            return Err(TextureError::Invalid(format!(
                "environment map must be 2:1, got {}x{}",
                image.width(),
                image.height()
            )));
        }
        if image.channels() < 3 {
            return Err(TextureError::Invalid("environment map must be RGB".into()));
        }
        if image.data().iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(TextureError::Invalid("environment radiance must be finite and non-negative".into()));
        }
        Ok(Self {
            image,
            rotation_y,
            exposure_ev,
        })
    }

    /// Uniform radiance `rgb` from every direction.
    pub fn constant(rgb: [f32; 3]) -> Self {
        let image = TextureMap::filled(2, 1, &rgb, ColorSpace::Linear);
        Self::new(Arc::new(image), 0.0, 0.0).expect("constant environment")
    }

    pub fn black() -> Self {
        Self::constant([0.0; 3])
    }

    pub fn scale(&self) -> f64 {
        self.exposure_ev.exp2()
    }

    /// Radiance arriving from direction `dir` (pointing away from the scene).
    pub fn radiance(&self, dir: &Vec3) -> [f64; 3] {
        let (s, c) = self.rotation_y.sin_cos();
        // Undo the map rotation, which advances the azimuth by rotation_y.
        let x = c * dir.x + s * dir.z;
        let z = -s * dir.x + c * dir.z;
        let len = (x * x + dir.y * dir.y + z * z).sqrt();
        let cos_theta = (dir.y / len).clamp(-1.0, 1.0);
        let theta = cos_theta.acos();
        let phi = z.atan2(x);
        let u = (phi / (2.0 * PI)).rem_euclid(1.0);
        let v = theta / PI;
        let texel = self.sample(u, v);
        let k = self.scale();
        [texel[0] * k, texel[1] * k, texel[2] * k]
    }

    /// Bilinear lookup wrapping in `u` and clamping in `v`.
    fn sample(&self, u: f64, v: f64) -> [f64; 3] {
        let img = &self.image;
        let (w, h) = (img.width() as i64, img.height() as i64);
        let fx = u * w as f64 - 0.5;
        let fy = v * h as f64 - 0.5;
        let x0 = fx.floor();
        let y0 = fy.floor();
        let tx = fx - x0;
        let ty = fy - y0;
        let mut out = [0.0; 3];
        for (dx, dy, wgt) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            if wgt == 0.0 {
                continue;
            }
            let x = (x0 as i64 + dx).rem_euclid(w) as u32;
            let y = (y0 as i64 + dy).clamp(0, h - 1) as u32;
            let t = img.texel(x, y);
            for k in 0..3 {
                out[k] += wgt * t[k] as f64;
            }
        }
        out
    }

    /// Solid-angle weighted mean radiance (exposure applied).
    pub fn mean_radiance(&self) -> [f64; 3] {
        let img = &self.image;
        let mut sum = [0.0; 3];
        let mut weight = 0.0;
        for y in 0..img.height() {
            let theta = PI * (y as f64 + 0.5) / img.height() as f64;
            let w = theta.sin();
            for x in 0..img.width() {
                let t = img.texel(x, y);
                for k in 0..3 {
                    sum[k] += w * t[k] as f64;
                }
                weight += w;
            }
        }
        let k = self.scale() / weight;
        sum.map(|s| s * k)
    }
}

/// Spherical light of radiant intensity `intensity` (W/sr per channel).
/// A zero radius gives an ideal point light.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointLight {
    pub position: Vec3,
    pub intensity: [f64; 3],
    pub radius: f64,
}

impl PointLight {
    pub fn is_valid(&self) -> bool {
        self.intensity.iter().all(|&i| i >= 0.0 && i.is_finite()) && self.radius >= 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_environment_everywhere() {
        let env = EnvironmentLight::constant([0.5, 0.25, 1.0]);
        for d in [Vec3::x(), -Vec3::y(), Vec3::new(0.3, 0.2, -0.9).normalize()] {
            assert_eq!(env.radiance(&d), [0.5, 0.25, 1.0]);
        }
        assert_eq!(env.mean_radiance(), [0.5, 0.25, 1.0]);
    }

    #[test]
    fn exposure_scales() {
        let mut env = EnvironmentLight::constant([0.5; 3]);
        env.exposure_ev = 1.0;
        assert_eq!(env.radiance(&Vec3::x()), [1.0; 3]);
    }

    #[test]
    fn rotation_moves_features() {
        let img = TextureMap::from_fn(64, 32, 3, ColorSpace::Linear, |x, _, o| {
            let v = if x == 16 { 10.0 } else { 0.0 };
            o.copy_from_slice(&[v, v, v]);
        });
        let mut env = EnvironmentLight::new(Arc::new(img), 0.0, 0.0).unwrap();
        let phi = 2.0 * PI * 16.5 / 64.0;
        let d = Vec3::new(phi.cos(), 0.0, phi.sin());
        assert!(env.radiance(&d)[0] > 9.9);
        env.rotation_y = 0.7;
        let rotated = Vec3::new((phi + 0.7).cos(), 0.0, (phi + 0.7).sin());
        assert!(env.radiance(&rotated)[0] > 9.9);
        assert!(env.radiance(&d)[0] < 1.0);
    }

    #[test]
    fn rejects_wrong_aspect_and_negative() {
        let img = TextureMap::filled(3, 2, &[1.0; 3], ColorSpace::Linear);
        assert!(EnvironmentLight::new(Arc::new(img), 0.0, 0.0).is_err());
        let img = TextureMap::filled(2, 1, &[-1.0, 0.0, 0.0], ColorSpace::Linear);
        assert!(EnvironmentLight::new(Arc::new(img), 0.0, 0.0).is_err());
    }
}
