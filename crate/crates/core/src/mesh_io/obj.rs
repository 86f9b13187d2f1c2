use std::collections::HashMap;
use std::io::BufRead;

use super::fan_triangulate;
use crate::error::MeshError;
use crate::math::Vec3;
use crate::mesh::Mesh;

type Corner = (u32, Option<u32>, Option<u32>);

/// Reads ASCII OBJ `v`/`vt`/`vn`/`f` records; everything else is ignored.
///
/// Each distinct (position, uv, normal) corner becomes one output vertex.
/// Normals are only taken from the file when every corner references one.
pub fn read_obj(reader: impl BufRead) -> Result<Mesh, MeshError> {
    let mut positions: Vec<Vec3> = Vec::new();
    let mut texcoords: Vec<[f64; 2]> = Vec::new();
    let mut normals: Vec<Vec3> = Vec::new();
    let mut corner_ids: HashMap<Corner, u32> = HashMap::new();
    let mut corners: Vec<Corner> = Vec::new();
    // (line, corner indices) per face, triangulated once all positions are known.
    let mut faces: Vec<(usize, Vec<u32>)> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| MeshError::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let line = line.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        let Some(kind) = tokens.next() else { continue };
        let err = |message: String| MeshError::Parse { line: lineno, message };
        let mut floats = |n: usize| -> Result<Vec<f64>, MeshError> {
            let vals: Vec<f64> = tokens
                .by_ref()
                .take(n)
                .map(|t| t.parse::<f64>().map_err(|_| err(format!("invalid number {t:?}"))))
                .collect::<Result<_, _>>()?;
            if vals.len() < n {
                return Err(err(format!("expected {n} numbers")));
            }
            Ok(vals)
        };
        match kind {
            "v" => {
                let v = floats(3)?;
                positions.push(Vec3::new(v[0], v[1], v[2]));
            }
            "vt" => {
                let v = floats(2)?;
                texcoords.push([v[0], v[1]]);
            }
            "vn" => {
                let v = floats(3)?;
                normals.push(Vec3::new(v[0], v[1], v[2]));
            }
            "f" => {
                let mut face = Vec::new();
                for token in tokens {
                    let corner = parse_corner(token, positions.len(), texcoords.len(), normals.len())
                        .map_err(|m| err(m))?;
                    let next = corners.len() as u32;
                    let id = *corner_ids.entry(corner).or_insert_with(|| {
                        corners.push(corner);
                        next
                    });
                    face.push(id);
                }
                faces.push((lineno, face));
            }
            _ => {}
        }
    }

    let vertices: Vec<Vec3> = corners.iter().map(|c| positions[c.0 as usize]).collect();
    let mut triangles = Vec::new();
    for (line, face) in &faces {
        triangles.extend(fan_triangulate(&vertices, face, *line)?);
    }
    let uvs: Vec<[f64; 2]> = corners
        .iter()
        .map(|c| c.1.map_or([0.0, 0.0], |t| texcoords[t as usize]))
        .collect();
    let vertex_normals = if !corners.is_empty() && corners.iter().all(|c| c.2.is_some()) {
        corners
            .iter()
            .map(|c| {
                let n = normals[c.2.unwrap() as usize];
                let len = n.norm();
                if len > 0.0 {
                    n / len
                } else {
                    Vec3::z()
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    Mesh::new(vertices, vertex_normals, uvs, triangles, 1)
}

fn resolve(index: &str, count: usize, what: &str) -> Result<u32, String> {
    let i: i64 = index.parse().map_err(|_| format!("invalid {what} index {index:?}"))?;
    let resolved = if i > 0 { i - 1 } else { count as i64 + i };
    if i == 0 || resolved < 0 || resolved >= count as i64 {
        return Err(format!("{what} index {i} out of range (have {count})"));
    }
    Ok(resolved as u32)
}

fn parse_corner(token: &str, nv: usize, nt: usize, nn: usize) -> Result<Corner, String> {
    let mut parts = token.split('/');
    let v = resolve(parts.next().unwrap_or(""), nv, "vertex")?;
    let t = match parts.next() {
        Some(s) if !s.is_empty() => Some(resolve(s, nt, "texcoord")?),
        _ => None,
    };
    let n = match parts.next() {
        Some(s) if !s.is_empty() => Some(resolve(s, nn, "normal")?),
        _ => None,
    };
    Ok((v, t, n))
}
