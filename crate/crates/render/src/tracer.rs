//! Per-ray shading for both render profiles.

use partsynth_core::math::{Ray, Vec3};
use partsynth_core::rng::RandomStream;
use partsynth_core::scene::Scene;
use partsynth_core::texture::{ColorSpace, TextureMap};
use partsynth_core::material::{MaterialMaps, FLAT_NORMAL};

use crate::brdf::{luminance, Brdf, Frame};
use crate::bvh::{Bvh, Hit};
use crate::profile::RenderProfile;

/// Albedo of the optional support plane (grey Lambertian).
pub const PLANE_ALBEDO: f64 = 0.5;
/// Tangent-space slope per unit of displacement gradient (UV units).
const DISPLACEMENT_SLOPE: f64 = 0.05;

/// Material textures prepared for lookup: albedo decoded to linear, flat
/// normal and displacement maps dropped.
struct SurfaceMaterial {
    albedo: TextureMap,
    normal: Option<TextureMap>,
    roughness: TextureMap,
    metallic: TextureMap,
    displacement: Option<TextureMap>,
    specular: f64,
}

impl SurfaceMaterial {
    fn new(m: &MaterialMaps) -> Self {
        let mut albedo = m.albedo.to_linear();
        albedo.color_space = ColorSpace::Linear;
        let flat_normal = m.normal.data().chunks(m.normal.channels()).all(|t| t[..3] == FLAT_NORMAL);
        let flat_height = m.displacement.data().windows(2).all(|w| w[0] == w[1]);
        Self {
            albedo,
            normal: (!flat_normal).then(|| m.normal.clone()),
            roughness: m.roughness.clone(),
            metallic: m.metallic.clone(),
            displacement: (!flat_height).then(|| m.displacement.clone()),
            specular: m.specular as f64,
        }
    }
}

/// Surface description at a ray hit.
pub struct Surface {
    pub position: Vec3,
    /// Geometric normal facing the incoming ray.
    pub ng: Vec3,
    /// Shading normal on the same side as `ng`.
    pub ns: Vec3,
    pub brdf: Brdf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SceneHit {
    Triangle(Hit),
    Plane { t: f64 },
}

impl SceneHit {
    pub fn t(&self) -> f64 {
        match self {
            SceneHit::Triangle(h) => h.t,
            SceneHit::Plane { t } => *t,
        }
    }

    /// Index into `Scene::instances`, `None` for the support plane.
    pub fn instance(&self) -> Option<usize> {
        match self {
            SceneHit::Triangle(h) => Some(h.instance as usize),
            SceneHit::Plane { .. } => None,
        }
    }
}

/// A scene with its acceleration structure and prepared materials.
pub struct RenderScene<'a> {
    pub scene: &'a Scene,
    pub bvh: Bvh,
    materials: Vec<SurfaceMaterial>,
    ambient: [f64; 3],
}

fn offset_origin(p: &Vec3, n: &Vec3) -> Vec3 {
    p + n * (1e-7 * (1.0 + p.amax()))
}

fn uniform_sphere(u1: f64, u2: f64) -> Vec3 {
    let z = 1.0 - 2.0 * u1;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

impl<'a> RenderScene<'a> {
    pub fn new(scene: &'a Scene) -> Self {
        Self {
            scene,
            bvh: Bvh::build(scene),
            materials: scene.instances.iter().map(|i| SurfaceMaterial::new(&i.material)).collect(),
            ambient: scene.environment.mean_radiance(),
        }
    }

    /// Nearest surface along the ray; ties with the plane go to the mesh.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> Option<SceneHit> {
        let tri = self.bvh.intersect(origin, dir, 0.0, t_max);
        let limit = tri.map_or(t_max, |h| h.t);
        if let Some(h) = self.scene.support_plane {
            if dir.y != 0.0 {
                let t = (h - origin.y) / dir.y;
                if t > 0.0 && t < limit {
                    return Some(SceneHit::Plane { t });
                }
            }
        }
        tri.map(SceneHit::Triangle)
    }

    pub fn occluded(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> bool {
        if let Some(h) = self.scene.support_plane {
            if dir.y != 0.0 {
                let t = (h - origin.y) / dir.y;
                if t > 0.0 && t < t_max {
                    return true;
                }
            }
        }
        self.bvh.occluded(origin, dir, 0.0, t_max)
    }

    pub fn surface(&self, hit: &SceneHit, ray: &Ray) -> Surface {
        let position = ray.at(hit.t());
        match hit {
            SceneHit::Plane { .. } => {
                let n = if ray.dir.y > 0.0 { -Vec3::y() } else { Vec3::y() };
                Surface {
                    position,
                    ng: n,
                    ns: n,
                    brdf: Brdf::lambert([PLANE_ALBEDO; 3]),
                }
            }
            SceneHit::Triangle(h) => self.triangle_surface(h, ray, position),
        }
    }

    fn triangle_surface(&self, h: &Hit, ray: &Ray, position: Vec3) -> Surface {
        let inst = &self.scene.instances[h.instance as usize];
        let mesh = &inst.mesh;
        let idx = mesh.triangles[h.local as usize].map(|i| i as usize);
        let w = [1.0 - h.b1 - h.b2, h.b1, h.b2];
        let world = &self.bvh.triangles[h.triangle as usize].v;
        let e1 = world[1] - world[0];
        let e2 = world[2] - world[0];
        let mut ng = e1.cross(&e2).normalize();
        if ng.dot(&ray.dir) > 0.0 {
            ng = -ng;
        }
        let rot = inst.model_to_world.rotation();
        let n_model = mesh.normals[idx[0]] * w[0] + mesh.normals[idx[1]] * w[1] + mesh.normals[idx[2]] * w[2];
        let mut ns = (rot * n_model).normalize();
        if !ns.iter().all(|c| c.is_finite()) {
            ns = ng;
        }
        if ns.dot(&ng) < 0.0 {
            ns = -ns;
        }
        let uv = [0, 1].map(|k| mesh.uvs[idx[0]][k] * w[0] + mesh.uvs[idx[1]][k] * w[1] + mesh.uvs[idx[2]][k] * w[2]);
        // Image rows run top to bottom while texture v runs bottom to top.
        let (tu, tv) = (uv[0], 1.0 - uv[1]);
        let mat = &self.materials[h.instance as usize];

        if mat.normal.is_some() || mat.displacement.is_some() {
            let uv0 = mesh.uvs[idx[0]];
            let (du1, dv1) = (mesh.uvs[idx[1]][0] - uv0[0], mesh.uvs[idx[1]][1] - uv0[1]);
            let (du2, dv2) = (mesh.uvs[idx[2]][0] - uv0[0], mesh.uvs[idx[2]][1] - uv0[1]);
            let det = du1 * dv2 - du2 * dv1;
            let tangent = if det.abs() > 1e-12 {
                (e1 * dv2 - e2 * dv1) / det
            } else {
                Frame::new(ns).t
            };
            let t = (tangent - ns * ns.dot(&tangent)).try_normalize(1e-12).unwrap_or_else(|| Frame::new(ns).t);
            let b = ns.cross(&t);
            let mut n = ns;
            if let Some(map) = &mat.normal {
                let c = map.sample_bilinear(tu, tv);
                let local = Vec3::new(2.0 * c[0] as f64 - 1.0, 2.0 * c[1] as f64 - 1.0, 2.0 * c[2] as f64 - 1.0);
                n = t * local.x + b * local.y + ns * local.z;
            }
            if let Some(map) = &mat.displacement {
                let (du, dv) = (1.0 / map.width() as f64, 1.0 / map.height() as f64);
                let hu = (map.sample_bilinear(tu + du, tv)[0] - map.sample_bilinear(tu - du, tv)[0]) as f64 / (2.0 * du);
                let hv = (map.sample_bilinear(tu, tv + dv)[0] - map.sample_bilinear(tu, tv - dv)[0]) as f64 / (2.0 * dv);
                // Texture v is flipped relative to the bitangent.
                n -= (t * hu - b * hv) * DISPLACEMENT_SLOPE;
            }
            if let Some(p) = n.try_normalize(1e-12) {
                if p.dot(&ng) > 0.0 {
                    ns = p;
                }
            }
        }
        if ns.dot(&-ray.dir) <= 0.0 {
            ns = ng;
        }

        let a = mat.albedo.sample_bilinear(tu, tv);
        let brdf = Brdf::new(
            [a[0] as f64, a[1] as f64, a[2] as f64],
            mat.roughness.sample_bilinear(tu, tv)[0] as f64,
            mat.metallic.sample_bilinear(tu, tv)[0] as f64,
            mat.specular,
        );
        Surface { position, ng, ns, brdf }
    }

    /// Direct light from all point lights, each sampled once at a uniform
    /// point of its sphere, with shadow rays.
    pub fn direct_lighting(&self, s: &Surface, wo: &Vec3, rng: &mut RandomStream) -> [f64; 3] {
        let mut sum = [0.0; 3];
        if self.scene.point_lights.is_empty() {
            return sum;
        }
        let frame = Frame::new(s.ns);
        let wo_local = frame.to_local(wo);
        let origin = offset_origin(&s.position, &s.ng);
        for light in &self.scene.point_lights {
            let target = if light.radius > 0.0 {
                light.position + uniform_sphere(rng.next_f64(), rng.next_f64()) * light.radius
            } else {
                light.position
            };
            let to = target - s.position;
            let dist2 = to.norm_squared();
            if !(dist2 > 0.0) {
                continue;
            }
            let dist = dist2.sqrt();
            let wi = to / dist;
            if wi.dot(&s.ng) <= 0.0 || wi.dot(&s.ns) <= 0.0 {
                continue;
            }
            let shadow_dir = target - origin;
            let shadow_len = shadow_dir.norm();
            if self.occluded(&origin, &(shadow_dir / shadow_len), shadow_len * (1.0 - 1e-9)) {
                continue;
            }
            let wi_local = frame.to_local(&wi);
            let f = s.brdf.eval(&wo_local, &wi_local);
            let g = wi_local.z / dist2;
            for k in 0..3 {
                sum[k] += f[k] * g * light.intensity[k];
            }
        }
        sum
    }

    /// Unidirectional path tracing with next-event estimation to point
    /// lights, BRDF-sampled continuation and environment lookup on miss.
    pub fn trace_path(&self, ray: &Ray, profile: &RenderProfile, rng: &mut RandomStream) -> [f64; 3] {
        let mut radiance = [0.0; 3];
        let mut throughput = [1.0; 3];
        let mut ray = *ray;
        for depth in 0..profile.max_depth {
            let Some(hit) = self.intersect(&ray.origin, &ray.dir, f64::INFINITY) else {
                let env = self.scene.environment.radiance(&ray.dir);
                for k in 0..3 {
                    radiance[k] += throughput[k] * env[k];
                }
                break;
            };
            let s = self.surface(&hit, &ray);
            let wo = -ray.dir;
            let direct = self.direct_lighting(&s, &wo, rng);
            for k in 0..3 {
                radiance[k] += throughput[k] * direct[k];
            }
            if depth + 1 == profile.max_depth {
                break;
            }
            let frame = Frame::new(s.ns);
            let u = [rng.next_f64(), rng.next_f64(), rng.next_f64()];
            let Some(sample) = s.brdf.sample(&frame.to_local(&wo), u) else {
                break;
            };
            let wi = frame.to_world(&sample.wi);
            if wi.dot(&s.ng) <= 0.0 {
                break;
            }
            for k in 0..3 {
                throughput[k] *= sample.weight[k];
            }
            if depth + 1 >= profile.rr_start_depth {
                let survive = luminance(&throughput).min(0.95);
                if !(survive > 0.0) || rng.next_f64() >= survive {
                    break;
                }
                for t in &mut throughput {
                    *t /= survive;
                }
            }
            ray = Ray::new(offset_origin(&s.position, &s.ng), wi);
        }
        radiance
    }

    /// Direct lighting with shadows plus an ambient term (mean environment
    /// radiance times albedo); no indirect bounces.
    pub fn shade_preview(&self, ray: &Ray, rng: &mut RandomStream) -> [f64; 3] {
        let Some(hit) = self.intersect(&ray.origin, &ray.dir, f64::INFINITY) else {
            return self.scene.environment.radiance(&ray.dir);
        };
        let s = self.surface(&hit, ray);
        let direct = self.direct_lighting(&s, &-ray.dir, rng);
        [0, 1, 2].map(|k| direct[k] + self.ambient[k] * s.brdf.albedo[k])
    }
}
