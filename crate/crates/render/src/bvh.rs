//! Bounding volume hierarchy over world-space triangles.

use partsynth_core::math::{Aabb, Vec3};
use partsynth_core::scene::Scene;

const LEAF_SIZE: usize = 4;

/// A world-space triangle with its origin in the scene.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BvhTriangle {
    pub v: [Vec3; 3],
    /// Index into `Scene::instances`.
    pub instance: u32,
    /// Triangle index within the instance's mesh.
    pub local: u32,
}

impl BvhTriangle {
    fn bounds(&self) -> Aabb {
        Aabb::from_points(&self.v)
    }

    fn centroid(&self) -> Vec3 {
        (self.v[0] + self.v[1] + self.v[2]) / 3.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f64,
    /// Index into [`Bvh::triangles`].
    pub triangle: u32,
    pub instance: u32,
    pub local: u32,
    /// Barycentric weights of vertices 1 and 2.
    pub b1: f64,
    pub b2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub bounds: Aabb,
    pub kind: NodeKind,
}

#[derive(Clone, Debug, Default)]
pub struct Bvh {
    pub nodes: Vec<Node>,
    pub triangles: Vec<BvhTriangle>,
    /// Leaf order: `order[k]` is the triangle stored at leaf slot `k`.
    pub order: Vec<u32>,
}

/// Möller–Trumbore ray/triangle test. Returns `(t, b1, b2)` for hits with
/// `t_min < t < t_max`; both faces count.
#[inline]
pub fn intersect_triangle(v: &[Vec3; 3], origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> Option<(f64, f64, f64)> {
    let e1 = v[1] - v[0];
    let e2 = v[2] - v[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - v[0];
    let b1 = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&b1) {
        return None;
    }
    let q = s.cross(&e1);
    let b2 = dir.dot(&q) * inv;
    if b2 < 0.0 || b1 + b2 > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    if t > t_min && t < t_max {
        Some((t, b1, b2))
    } else {
        None
    }
}

fn push_instance(scene: &Scene, i: usize, tris: &mut Vec<BvhTriangle>) {
    let inst = &scene.instances[i];
    let world: Vec<Vec3> = inst.mesh.vertices.iter().map(|p| inst.model_to_world.transform_point(p)).collect();
    for (k, t) in inst.mesh.triangles.iter().enumerate() {
        tris.push(BvhTriangle {
            v: t.map(|j| world[j as usize]),
            instance: i as u32,
            local: k as u32,
        });
    }
}

impl Bvh {
    /// Hierarchy over every triangle of every instance, in instance order.
    pub fn build(scene: &Scene) -> Bvh {
        let mut tris = Vec::with_capacity(scene.triangle_count());
        for i in 0..scene.instances.len() {
            push_instance(scene, i, &mut tris);
        }
        Self::from_triangles(tris)
    }

    /// Hierarchy over one instance alone. World-space vertices are computed
    /// exactly as in [`Bvh::build`], so hits on that instance agree bit for bit.
    pub fn build_instance(scene: &Scene, index: usize) -> Bvh {
        let mut tris = Vec::with_capacity(scene.instances[index].mesh.triangles.len());
        push_instance(scene, index, &mut tris);
        Self::from_triangles(tris)
    }

    /// Median-split build. Triangles with equal centroid coordinates keep
    /// their index order, so the tree is a pure function of the input.
    pub fn from_triangles(triangles: Vec<BvhTriangle>) -> Bvh {
        let mut bvh = Bvh {
            nodes: Vec::new(),
            order: (0..triangles.len() as u32).collect(),
            triangles,
        };
        if !bvh.triangles.is_empty() {
            let centroids: Vec<Vec3> = bvh.triangles.iter().map(BvhTriangle::centroid).collect();
            let bounds: Vec<Aabb> = bvh.triangles.iter().map(BvhTriangle::bounds).collect();
            let n = bvh.order.len();
            bvh.build_node(&centroids, &bounds, 0, n);
        }
        bvh
    }

    fn build_node(&mut self, centroids: &[Vec3], bounds: &[Aabb], start: usize, end: usize) -> u32 {
        let slice = &mut self.order[start..end];
        let node_bounds = slice.iter().fold(Aabb::empty(), |b, &i| b.union(&bounds[i as usize]));
        let index = self.nodes.len() as u32;
        self.nodes.push(Node {
            bounds: node_bounds,
            kind: NodeKind::Leaf {
                start: start as u32,
                count: (end - start) as u32,
            },
        });
        if end - start <= LEAF_SIZE {
            return index;
        }
        let cb = Aabb::from_points(slice.iter().map(|&i| &centroids[i as usize]));
        let axis = cb.longest_axis();
        if cb.extent()[axis] <= 0.0 {
            return index;
        }
        slice.sort_by(|&a, &b| {
            centroids[a as usize][axis]
                .total_cmp(&centroids[b as usize][axis])
                .then(a.cmp(&b))
        });
        let mid = start + (end - start) / 2;
        let left = self.build_node(centroids, bounds, start, mid);
        let right = self.build_node(centroids, bounds, mid, end);
        self.nodes[index as usize].kind = NodeKind::Inner { left, right };
        index
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Nearest hit with `t_min < t < t_max`. Equal distances resolve to the
    /// lower triangle index.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<Hit> = None;
        let mut limit = t_max;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if node.bounds.hit(origin, &inv, t_min, limit).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &ti in &self.order[start as usize..(start + count) as usize] {
                        let tri = &self.triangles[ti as usize];
                        // Admit a tie with the current best so the index rule can apply.
                        let upper = if best.is_some() { limit.next_up() } else { t_max };
                        if let Some((t, b1, b2)) = intersect_triangle(&tri.v, origin, dir, t_min, upper) {
                            let better = match best {
                                None => true,
                                Some(h) => t < h.t || (t == h.t && ti < h.triangle),
                            };
                            if better {
                                limit = t;
                                best = Some(Hit {
                                    t,
                                    triangle: ti,
                                    instance: tri.instance,
                                    local: tri.local,
                                    b1,
                                    b2,
                                });
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    // Visit the nearer child first.
                    let dl = self.nodes[left as usize].bounds.hit(origin, &inv, t_min, limit);
                    let dr = self.nodes[right as usize].bounds.hit(origin, &inv, t_min, limit);
                    match (dl, dr) {
                        (Some(a), Some(b)) if b < a => {
                            stack.push(left);
                            stack.push(right);
                        }
                        _ => {
                            stack.push(right);
                            stack.push(left);
                        }
                    }
                }
            }
        }
        best
    }

    /// Whether anything lies strictly between `t_min` and `t_max`.
    pub fn occluded(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if node.bounds.hit(origin, &inv, t_min, t_max).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &ti in &self.order[start as usize..(start + count) as usize] {
                        if intersect_triangle(&self.triangles[ti as usize].v, origin, dir, t_min, t_max).is_some() {
                            return true;
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        false
    }
}
