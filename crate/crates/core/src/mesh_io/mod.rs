//! Wavefront OBJ and Stanford PLY readers, plus a PLY writer.

mod obj;
mod ply;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use crate::error::MeshError;
use crate::math::Vec3;
use crate::mesh::Mesh;

pub use obj::read_obj;
pub use ply::{read_ply, write_ply};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(Self::Obj),
            "ply" => Some(Self::Ply),
            _ => None,
        }
    }
}

/// Loads a triangle mesh. The returned mesh has `object_id` 1; callers
/// assign catalog ids with [`Mesh::with_object_id`].
pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<Mesh, MeshError> {
    let file = File::open(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);
    match format {
        MeshFormat::Obj => read_obj(reader),
        MeshFormat::Ply => read_ply(reader),
    }
}

/// Loads a mesh, picking the format from the file extension.
pub fn load_mesh_auto(path: &Path) -> Result<Mesh, MeshError> {
    let format = MeshFormat::from_path(path).ok_or_else(|| MeshError::UnsupportedFormat(path.to_path_buf()))?;
    load_mesh(path, format)
}

pub fn save_ply(mesh: &Mesh, path: &Path) -> Result<(), MeshError> {
    let io_err = |source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    write_ply(mesh, &mut w).map_err(io_err)?;
    std::io::Write::flush(&mut w).map_err(io_err)
}

/// Splits a polygon into a triangle fan, refusing non-convex outlines.
fn fan_triangulate(positions: &[Vec3], corners: &[u32], line: usize) -> Result<Vec<[u32; 3]>, MeshError> {
    let n = corners.len();
    if n < 3 {
        return Err(MeshError::Parse {
            line,
            message: format!("face has {n} vertices"),
        });
    }
    if n == 3 {
        return Ok(vec![[corners[0], corners[1], corners[2]]]);
    }
    let p = |i: usize| positions[corners[i % n] as usize];
    // Newell normal of the polygon.
    let mut normal = Vec3::zeros();
    for i in 0..n {
        let (a, b) = (p(i), p(i + 1));
        normal += Vec3::new(
            (a.y - b.y) * (a.z + b.z),
            (a.z - b.z) * (a.x + b.x),
            (a.x - b.x) * (a.y + b.y),
        );
    }
    let scale = normal.norm();
    let convex = scale > 0.0
        && (0..n).all(|i| {
            let turn = (p(i + 1) - p(i)).cross(&(p(i + 2) - p(i + 1)));
            turn.dot(&normal) >= -1e-12 * scale * scale
        });
    if !convex {
        return Err(MeshError::NonConvexFace { line, vertices: n });
    }
    Ok((1..n - 1).map(|i| [corners[0], corners[i], corners[i + 1]]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE_OBJ: &str = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    const TRIANGLE_PLY: &str = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";

    const CUBE_OBJ: &str = "\
v -0.5 -0.5 -0.5\nv 0.5 -0.5 -0.5\nv 0.5 0.5 -0.5\nv -0.5 0.5 -0.5\n\
v -0.5 -0.5 0.5\nv 0.5 -0.5 0.5\nv 0.5 0.5 0.5\nv -0.5 0.5 0.5\n\
f 1 4 3 2\nf 5 6 7 8\nf 1 2 6 5\nf 3 4 8 7\nf 2 3 7 6\nf 1 5 8 4\n";

    #[test]
    fn single_triangle_obj() {
        let m = read_obj(TRIANGLE_OBJ.as_bytes()).unwrap();
        assert_eq!(m.vertices.len(), 3);
        assert_eq!(m.triangles, vec![[0, 1, 2]]);
        assert!(m.normals.iter().all(|n| (n - Vec3::z()).norm() < 1e-12));
    }

    #[test]
    fn ply_equals_obj() {
        let a = read_obj(TRIANGLE_OBJ.as_bytes()).unwrap();
        let b = read_ply(TRIANGLE_PLY.as_bytes()).unwrap();
        assert_eq!(a, b);
    }

    /// Brute-force area sum over the fan-triangulated quads.
    #[test]
    fn cube_area_oracle() {
        let m = read_obj(CUBE_OBJ.as_bytes()).unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.triangles.len(), 12);
        let mut area = 0.0;
        for t in &m.triangles {
            let [a, b, c] = t.map(|i| m.vertices[i as usize]);
            area += 0.5 * (b - a).cross(&(c - a)).norm();
        }
        assert!((area - 6.0).abs() < 1e-6);
    }

    #[test]
    fn concave_polygon_rejected() {
        let src = "v 0 0 0\nv 2 0 0\nv 1 0.2 0\nv 2 2 0\nv 0 2 0\nf 1 2 3 4 5\n";
        match read_obj(src.as_bytes()) {
            Err(MeshError::NonConvexFace { line: 6, vertices: 5 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_reports_line() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 x 0\nf 1 2 3\n";
        match read_obj(src.as_bytes()) {
            Err(MeshError::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ply_round_trip_cube_sphere() {
        for mesh in [Mesh::cube(0.37, 4), Mesh::uv_sphere(0.123, 7, 9, 4)] {
            let mut buf = Vec::new();
            write_ply(&mesh, &mut buf).unwrap();
            let back = read_ply(buf.as_slice()).unwrap().with_object_id(4);
            assert_eq!(back.vertices, mesh.vertices);
            assert_eq!(back.triangles, mesh.triangles);
            assert_eq!(back.uvs, mesh.uvs);
        }
    }
}
