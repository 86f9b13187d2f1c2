//! Metallic-roughness BRDF: Lambert diffuse plus GGX specular with
//! separable Smith shadowing and Schlick Fresnel.
//!
//! All vectors are in a local frame with the shading normal on +Z and point
//! away from the surface.

use std::f64::consts::PI;

use partsynth_core::math::Vec3;

const MIN_ALPHA: f64 = 1e-3;

pub fn luminance(c: &[f64; 3]) -> f64 {
    0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2]
}

/// Orthonormal basis around a unit normal (Duff et al. 2017).
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub t: Vec3,
    pub b: Vec3,
    pub n: Vec3,
}

impl Frame {
    pub fn new(n: Vec3) -> Self {
        let sign = 1.0f64.copysign(n.z);
        let a = -1.0 / (sign + n.z);
        let b = n.x * n.y * a;
        Self {
            t: Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x),
            b: Vec3::new(b, sign + n.y * n.y * a, -n.y),
            n,
        }
    }

    pub fn to_local(&self, v: &Vec3) -> Vec3 {
        Vec3::new(v.dot(&self.t), v.dot(&self.b), v.dot(&self.n))
    }

    pub fn to_world(&self, v: &Vec3) -> Vec3 {
        self.t * v.x + self.b * v.y + self.n * v.z
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Brdf {
    /// Linear base color.
    pub albedo: [f64; 3],
    pub alpha: f64,
    pub metallic: f64,
    pub f0: [f64; 3],
    /// Grazing reflectance; zero when F0 is zero so that a surface without
    /// specular reflectance is purely Lambertian.
    pub f90: f64,
}

pub struct BrdfSample {
    pub wi: Vec3,
    /// `f · cosθ / pdf`.
    pub weight: [f64; 3],
    pub pdf: f64,
}

impl Brdf {
    pub fn new(albedo: [f64; 3], roughness: f64, metallic: f64, specular: f64) -> Self {
        let metallic = metallic.clamp(0.0, 1.0);
        let roughness = roughness.clamp(0.0, 1.0);
        let dielectric = 0.08 * specular.clamp(0.0, 1.0);
        let f0 = [0, 1, 2].map(|k| dielectric * (1.0 - metallic) + albedo[k] * metallic);
        let f90 = (50.0 * f0[0].max(f0[1]).max(f0[2])).min(1.0);
        Self {
            albedo,
            alpha: (roughness * roughness).max(MIN_ALPHA),
            metallic,
            f0,
            f90,
        }
    }

    pub fn lambert(albedo: [f64; 3]) -> Self {
        Self::new(albedo, 1.0, 0.0, 0.0)
    }

    fn fresnel(&self, cos: f64) -> [f64; 3] {
        let m = (1.0 - cos).clamp(0.0, 1.0).powi(5);
        self.f0.map(|f| f + (self.f90 - f) * m)
    }

    fn d(&self, cos_h: f64) -> f64 {
        let a2 = self.alpha * self.alpha;
        let k = cos_h * cos_h * (a2 - 1.0) + 1.0;
        a2 / (PI * k * k)
    }

    fn g1(&self, cos: f64) -> f64 {
        let a2 = self.alpha * self.alpha;
        2.0 * cos / (cos + (a2 + (1.0 - a2) * cos * cos).sqrt())
    }

    fn has_specular(&self) -> bool {
        self.f90 > 0.0
    }

    /// Probability of sampling the specular lobe given the outgoing direction.
    fn specular_probability(&self, wo: &Vec3) -> f64 {
        if !self.has_specular() {
            return 0.0;
        }
        let ws = luminance(&self.fresnel(wo.z));
        let wd = (1.0 - self.metallic) * luminance(&self.albedo) * (1.0 - ws);
        if ws + wd <= 0.0 {
            0.0
        } else {
            ws / (ws + wd)
        }
    }

    /// BRDF value (without the cosine factor).
    pub fn eval(&self, wo: &Vec3, wi: &Vec3) -> [f64; 3] {
        if wo.z <= 0.0 || wi.z <= 0.0 {
            return [0.0; 3];
        }
        let diffuse_scale = (1.0 - self.metallic) / PI;
        if !self.has_specular() {
            return self.albedo.map(|a| a * diffuse_scale);
        }
        let h = (wo + wi).normalize();
        let f = self.fresnel(wo.dot(&h).max(0.0));
        let spec = self.d(h.z) * self.g1(wo.z) * self.g1(wi.z) / (4.0 * wo.z * wi.z);
        // Light reflected by the specular layer at this view angle never
        // reaches the diffuse base.
        let f_view = self.fresnel(wo.z);
        [0, 1, 2].map(|k| (1.0 - f_view[k]) * self.albedo[k] * diffuse_scale + f[k] * spec)
    }

    pub fn pdf(&self, wo: &Vec3, wi: &Vec3) -> f64 {
        if wo.z <= 0.0 || wi.z <= 0.0 {
            return 0.0;
        }
        let ps = self.specular_probability(wo);
        let diffuse = wi.z / PI;
        if ps == 0.0 {
            return diffuse;
        }
        let h = (wo + wi).normalize();
        let vh = wo.dot(&h);
        let spec = if vh > 0.0 { self.d(h.z) * h.z / (4.0 * vh) } else { 0.0 };
        ps * spec + (1.0 - ps) * diffuse
    }

    /// Samples an incoming direction from the lobe mixture. `u` holds three
    /// uniform numbers in [0, 1).
    pub fn sample(&self, wo: &Vec3, u: [f64; 3]) -> Option<BrdfSample> {
        if wo.z <= 0.0 {
            return None;
        }
        let ps = self.specular_probability(wo);
        let wi = if u[0] < ps {
            let a2 = self.alpha * self.alpha;
            let cos_t = ((1.0 - u[1]) / (1.0 + (a2 - 1.0) * u[1])).sqrt();
            let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
            let phi = 2.0 * PI * u[2];
            let h = Vec3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t);
            2.0 * wo.dot(&h) * h - wo
        } else {
            let r = u[1].sqrt();
            let phi = 2.0 * PI * u[2];
            Vec3::new(r * phi.cos(), r * phi.sin(), (1.0 - u[1]).max(0.0).sqrt())
        };
        if wi.z <= 0.0 {
            return None;
        }
        if ps == 0.0 {
            // Cosine sampling of a pure Lambertian lobe: f·cos/pdf = albedo·(1 − metallic).
            return Some(BrdfSample {
                wi,
                weight: self.albedo.map(|a| a * (1.0 - self.metallic)),
                pdf: wi.z / PI,
            });
        }
        let pdf = self.pdf(wo, &wi);
        if !(pdf > 0.0) {
            return None;
        }
        let f = self.eval(wo, &wi);
        Some(BrdfSample {
            wi,
            weight: f.map(|v| v * wi.z / pdf),
            pdf,
        })
    }
}
