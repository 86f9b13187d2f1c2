use std::path::Path;

use crate::error::TextureError;
use crate::texture::{linear_to_srgb, ColorSpace, TextureMap};

/// Metallic-roughness material.
///
/// `albedo` is sRGB-tagged RGB; `normal` stores tangent-space normals
/// encoded as `0.5·n + 0.5`; `roughness`, `metallic` and `displacement` are
/// single-channel linear maps in [0, 1]. Displacement only perturbs shading
/// normals. `specular` scales the dielectric reflectance (`F0 = 0.08 ·
/// specular`, so 0.5 gives the usual 0.04 and 0 a purely diffuse surface).
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialMaps {
    pub albedo: TextureMap,
    pub normal: TextureMap,
    pub roughness: TextureMap,
    pub metallic: TextureMap,
    pub displacement: TextureMap,
    pub specular: f32,
}

pub const FLAT_NORMAL: [f32; 3] = [0.5, 0.5, 1.0];
pub const DEFAULT_SPECULAR: f32 = 0.5;

impl MaterialMaps {
    /// Spatially constant material; `albedo` is given in linear RGB.
    pub fn uniform(albedo: [f32; 3], roughness: f32, metallic: f32) -> Self {
        Self {
            albedo: TextureMap::filled(1, 1, &albedo.map(linear_to_srgb), ColorSpace::Srgb),
            normal: TextureMap::filled(1, 1, &FLAT_NORMAL, ColorSpace::Linear),
            roughness: TextureMap::filled(1, 1, &[roughness], ColorSpace::Linear),
            metallic: TextureMap::filled(1, 1, &[metallic], ColorSpace::Linear),
            displacement: TextureMap::filled(1, 1, &[0.0], ColorSpace::Linear),
            specular: DEFAULT_SPECULAR,
        }
    }

    /// Lambertian-only material (no specular lobe).
    pub fn diffuse(albedo: [f32; 3]) -> Self {
        Self {
            specular: 0.0,
            ..Self::uniform(albedo, 1.0, 0.0)
        }
    }

    pub fn validate(&self) -> Result<(), TextureError> {
        let check = |name: &str, t: &TextureMap, channels: &[usize]| {
            if !channels.contains(&t.channels()) {
                return Err(TextureError::Invalid(format!("{name} map has {} channels", t.channels())));
            }
            Ok(())
        };
        check("albedo", &self.albedo, &[3, 4])?;
        check("normal", &self.normal, &[3, 4])?;
        check("roughness", &self.roughness, &[1])?;
        check("metallic", &self.metallic, &[1])?;
        check("displacement", &self.displacement, &[1])?;
        for (name, t) in [("roughness", &self.roughness), ("metallic", &self.metallic)] {
            if t.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(TextureError::Invalid(format!("{name} values must lie in [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.specular) {
            return Err(TextureError::Invalid("specular must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Copy with every map bilinearly resampled to `width × height`.
    /// Maps that already have that size are copied verbatim.
    pub fn expanded_to(&self, width: u32, height: u32) -> MaterialMaps {
        MaterialMaps {
            albedo: self.albedo.resized(width, height),
            normal: self.normal.resized(width, height),
            roughness: self.roughness.resized(width, height),
            metallic: self.metallic.resized(width, height),
            displacement: self.displacement.resized(width, height),
            specular: self.specular,
        }
    }

    /// Loads a texture set directory: `albedo.png` is required; `normal.png`,
    /// `roughness.png`, `metallic.png` and `displacement.png` are optional
    /// and default to flat / 0.5 / 0 / 0.
    pub fn load_dir(dir: &Path) -> Result<Self, TextureError> {
        let mut m = Self::uniform([0.5; 3], 0.5, 0.0);
        m.albedo = TextureMap::load(&dir.join("albedo.png"), ColorSpace::Srgb)?;
        let optional = |name: &str| -> Result<Option<TextureMap>, TextureError> {
            let p = dir.join(name);
            if p.exists() {
                TextureMap::load(&p, ColorSpace::Linear).map(Some)
            } else {
                Ok(None)
            }
        };
        if let Some(n) = optional("normal.png")? {
            m.normal = n;
        }
        let scalar = |t: TextureMap| -> TextureMap {
            if t.channels() == 1 {
                t
            } else {
                let c = t.channels();
                TextureMap::from_fn(t.width(), t.height(), 1, ColorSpace::Linear, |x, y, o| {
                    o[0] = t.texel(x, y)[..c.min(3)].iter().sum::<f32>() / c.min(3) as f32
                })
            }
        };
        if let Some(t) = optional("roughness.png")? {
            m.roughness = scalar(t);
        }
        if let Some(t) = optional("metallic.png")? {
            m.metallic = scalar(t);
        }
        if let Some(t) = optional("displacement.png")? {
            m.displacement = scalar(t);
        }
        m.validate()?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_valid() {
        let m = MaterialMaps::uniform([0.2, 0.4, 0.8], 0.3, 1.0);
        m.validate().unwrap();
        assert_eq!(m.albedo.color_space, ColorSpace::Srgb);
        assert_eq!(MaterialMaps::diffuse([1.0; 3]).specular, 0.0);
    }

    #[test]
    fn out_of_range_roughness_rejected() {
        let mut m = MaterialMaps::uniform([0.5; 3], 0.3, 0.0);
        m.roughness = TextureMap::filled(1, 1, &[1.5], ColorSpace::Linear);
        assert!(m.validate().is_err());
    }

    #[test]
    fn load_texture_set_dir() {
        let dir = tempfile::tempdir().unwrap();
        TextureMap::filled(4, 4, &[0.2, 0.4, 0.6], ColorSpace::Srgb)
            .save_png(&dir.path().join("albedo.png"), false)
            .unwrap();
        TextureMap::filled(4, 4, &[0.7], ColorSpace::Linear)
            .save_png(&dir.path().join("roughness.png"), false)
            .unwrap();
        let m = MaterialMaps::load_dir(dir.path()).unwrap();
        assert_eq!(m.albedo.dimensions(), (4, 4));
        assert!((m.roughness.texel(1, 1)[0] - 0.7).abs() < 0.01);
        assert_eq!(m.metallic.texel(0, 0)[0], 0.0);
        assert!(MaterialMaps::load_dir(&dir.path().join("missing")).is_err());
    }
}
