use std::f64::consts::PI;

use crate::error::MeshError;
use crate::math::{Aabb, RigidTransform, Vec3};

const NORMAL_TOLERANCE: f64 = 1e-4;

/// Indexed triangle mesh in model space (meters).
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub uvs: Vec<[f64; 2]>,
    pub triangles: Vec<[u32; 3]>,
    pub object_id: u32,
}

impl Mesh {
    /// Builds and validates a mesh. Empty `normals` are computed from
    /// area-weighted face normals; empty `uvs` are zero-filled.
    pub fn new(
        vertices: Vec<Vec3>,
        normals: Vec<Vec3>,
        uvs: Vec<[f64; 2]>,
        triangles: Vec<[u32; 3]>,
        object_id: u32,
    ) -> Result<Self, MeshError> {
        let n = vertices.len();
        let mut mesh = Self {
            vertices,
            normals,
            uvs,
            triangles,
            object_id,
        };
        if mesh.uvs.is_empty() {
            mesh.uvs = vec![[0.0, 0.0]; n];
        }
        if let Some(t) = mesh.triangles.iter().find(|t| t.iter().any(|&i| i as usize >= n)) {
            return Err(MeshError::Invalid(format!("triangle {t:?} indexes past {n} vertices")));
        }
        if mesh.normals.is_empty() {
            mesh.compute_vertex_normals();
        }
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.vertices.len();
        if self.normals.len() != n || self.uvs.len() != n {
            return Err(MeshError::Invalid(format!(
                "attribute count mismatch: {} vertices, {} normals, {} uvs",
                n,
                self.normals.len(),
                self.uvs.len()
            )));
        }
        if self.object_id == 0 {
            return Err(MeshError::Invalid("object_id must be positive".into()));
        }
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i as usize >= n)) {
            return Err(MeshError::Invalid(format!("triangle {t:?} indexes past {n} vertices")));
        }
        if let Some((i, nrm)) = self
            .normals
            .iter()
            .enumerate()
            .find(|(_, v)| !((v.norm() - 1.0).abs() <= NORMAL_TOLERANCE))
        {
            return Err(MeshError::Invalid(format!("normal {i} has length {}", nrm.norm())));
        }
        if !self.vertices.iter().all(|v| v.iter().all(|c| c.is_finite())) {
            return Err(MeshError::Invalid("non-finite vertex position".into()));
        }
        Ok(())
    }

    pub fn with_object_id(mut self, object_id: u32) -> Self {
        self.object_id = object_id;
        self
    }

    /// Replaces the normals with normalized sums of incident face normals
    /// weighted by face area.
    pub fn compute_vertex_normals(&mut self) {
        let mut acc = vec![Vec3::zeros(); self.vertices.len()];
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i as usize]);
            // |cross| is twice the area, which is the weighting we want.
            let n = (b - a).cross(&(c - a));
            for &i in t {
                acc[i as usize] += n;
            }
        }
        self.normals = acc
            .into_iter()
            .map(|n| {
                let len = n.norm();
                if len > 0.0 && len.is_finite() {
                    n / len
                } else {
                    Vec3::z()
                }
            })
            .collect();
    }

    pub fn triangle_positions(&self, i: usize) -> [Vec3; 3] {
        self.triangles[i].map(|k| self.vertices[k as usize])
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle_positions(i);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    /// Area-weighted centroid of the surface.
    pub fn surface_centroid(&self) -> Vec3 {
        let mut sum = Vec3::zeros();
        let mut area = 0.0;
        for i in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_positions(i);
            let w = self.triangle_area(i);
            sum += (a + b + c) * (w / 3.0);
            area += w;
        }
        if area > 0.0 {
            sum / area
        } else {
            self.aabb().center()
        }
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    pub fn transformed_aabb(&self, transform: &RigidTransform) -> Aabb {
        let mut b = Aabb::empty();
        for v in &self.vertices {
            b.grow(&transform.transform_point(v));
        }
        b
    }

    /// Uniformly scaled copy (e.g. meters ↔ millimeters).
    pub fn scaled(&self, factor: f64) -> Mesh {
        let mut m = self.clone();
        for v in &mut m.vertices {
            *v *= factor;
        }
        m
    }

    /// Axis-aligned cube of edge `size` centered at the origin, with flat
    /// per-face normals (24 vertices).
    pub fn cube(size: f64, object_id: u32) -> Mesh {
        let h = size * 0.5;
        let mut vertices = Vec::with_capacity(24);
        let mut normals = Vec::with_capacity(24);
        let mut uvs = Vec::with_capacity(24);
        let mut triangles = Vec::with_capacity(12);
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let mut n = Vec3::zeros();
                n[axis] = sign;
                // Tangent frame (u, v) with u × v = n.
                let mut u = Vec3::zeros();
                u[(axis + 1) % 3] = 1.0;
                let v = n.cross(&u);
                let base = vertices.len() as u32;
                for (su, sv) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                    vertices.push((n + u * su + v * sv) * h);
                    normals.push(n);
                    uvs.push([(su + 1.0) * 0.5, (sv + 1.0) * 0.5]);
                }
                triangles.push([base, base + 1, base + 2]);
                triangles.push([base, base + 2, base + 3]);
            }
        }
        Mesh {
            vertices,
            normals,
            uvs,
            triangles,
            object_id,
        }
    }

    /// Latitude/longitude sphere with poles on ±Y.
    pub fn uv_sphere(radius: f64, stacks: u32, slices: u32, object_id: u32) -> Mesh {
        let stacks = stacks.max(2);
        let slices = slices.max(3);
        let mut vertices = Vec::new();
        let mut normals = Vec::new();
        let mut uvs = Vec::new();
        for i in 0..=stacks {
            let theta = PI * i as f64 / stacks as f64;
            for j in 0..=slices {
                let phi = 2.0 * PI * j as f64 / slices as f64;
                let n = Vec3::new(theta.sin() * phi.cos(), theta.cos(), theta.sin() * phi.sin());
                vertices.push(n * radius);
                normals.push(n);
                uvs.push([j as f64 / slices as f64, i as f64 / stacks as f64]);
            }
        }
        let idx = |i: u32, j: u32| i * (slices + 1) + j;
        let mut triangles = Vec::new();
        for i in 0..stacks {
            for j in 0..slices {
                if i + 1 < stacks {
                    triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)]);
                }
                if i > 0 {
                    triangles.push([idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)]);
                }
            }
        }
        Mesh {
            vertices,
            normals,
            uvs,
            triangles,
            object_id,
        }
    }

    /// Square of edge `size` in the XZ plane, facing +Y.
    pub fn quad(size: f64, object_id: u32) -> Mesh {
        let h = size * 0.5;
        Mesh {
            vertices: vec![
                Vec3::new(-h, 0.0, -h),
                Vec3::new(h, 0.0, -h),
                Vec3::new(h, 0.0, h),
                Vec3::new(-h, 0.0, h),
            ],
            normals: vec![Vec3::y(); 4],
            uvs: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            triangles: vec![[0, 2, 1], [0, 3, 2]],
            object_id,
        }
    }
}
