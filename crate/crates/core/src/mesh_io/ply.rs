use std::io::{BufRead, Read, Write};

use super::fan_triangulate;
use crate::error::MeshError;
use crate::math::Vec3;
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn decode_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Clone, Copy, PartialEq)]
enum Encoding {
    Ascii,
    BinaryLe,
}

/// Source of property values; ASCII tokens or little-endian bytes.
trait ValueSource {
    fn next(&mut self, ty: Scalar) -> Result<f64, MeshError>;
    fn location(&self) -> usize;
}

struct AsciiSource<R> {
    reader: R,
    line: usize,
    tokens: Vec<String>,
    pos: usize,
}

impl<R: BufRead> ValueSource for AsciiSource<R> {
    fn next(&mut self, _ty: Scalar) -> Result<f64, MeshError> {
        while self.pos >= self.tokens.len() {
            let mut buf = String::new();
            let n = self.reader.read_line(&mut buf).map_err(|e| MeshError::Parse {
                line: self.line + 1,
                message: e.to_string(),
            })?;
            if n == 0 {
                return Err(MeshError::Parse {
                    line: self.line,
                    message: "unexpected end of file".into(),
                });
            }
            self.line += 1;
            self.tokens = buf.split_whitespace().map(str::to_string).collect();
            self.pos = 0;
        }
        let tok = &self.tokens[self.pos];
        self.pos += 1;
        tok.parse::<f64>().map_err(|_| MeshError::Parse {
            line: self.line,
            message: format!("invalid number {tok:?}"),
        })
    }

    fn location(&self) -> usize {
        self.line
    }
}

struct BinarySource<R> {
    reader: R,
    offset: usize,
    header_lines: usize,
}

impl<R: Read> ValueSource for BinarySource<R> {
    fn next(&mut self, ty: Scalar) -> Result<f64, MeshError> {
        let mut buf = [0u8; 8];
        let n = ty.size();
        self.reader.read_exact(&mut buf[..n]).map_err(|e| MeshError::Parse {
            line: self.header_lines,
            message: format!("binary body at byte {}: {e}", self.offset),
        })?;
        self.offset += n;
        Ok(ty.decode_le(&buf[..n]))
    }

    fn location(&self) -> usize {
        self.header_lines
    }
}

/// Reads an ASCII or binary little-endian PLY triangle mesh.
///
/// Recognized vertex properties are `x y z`, `nx ny nz` and texture
/// coordinates (`u v`, `s t`, `texture_u texture_v`); face indices come
/// from `vertex_indices` or `vertex_index`. Other elements are skipped.
pub fn read_ply(mut reader: impl BufRead) -> Result<Mesh, MeshError> {
    let mut line_no = 0;
    let mut next_line = |reader: &mut dyn BufRead| -> Result<(usize, String), MeshError> {
        let mut buf = String::new();
        let n = reader.read_line(&mut buf).map_err(|e| MeshError::Parse {
            line: line_no + 1,
            message: e.to_string(),
        })?;
        line_no += 1;
        if n == 0 {
            return Err(MeshError::Parse {
                line: line_no,
                message: "unexpected end of header".into(),
            });
        }
        Ok((line_no, buf.trim().to_string()))
    };

    let (_, magic) = next_line(&mut reader)?;
    if magic != "ply" {
        return Err(MeshError::Parse {
            line: 1,
            message: "missing 'ply' magic".into(),
        });
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    let header_end = loop {
        let (ln, line) = next_line(&mut reader)?;
        let err = |message: String| MeshError::Parse { line: ln, message };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", "ascii", "1.0"] => encoding = Some(Encoding::Ascii),
            ["format", "binary_little_endian", "1.0"] => encoding = Some(Encoding::BinaryLe),
            ["format", other, ..] => return Err(err(format!("unsupported PLY format {other}"))),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| err(format!("invalid element count {count:?}")))?,
                properties: Vec::new(),
            }),
            ["property", "list", count, item, name] => {
                let count = Scalar::parse(count).ok_or_else(|| err(format!("unknown type {count}")))?;
                let item = Scalar::parse(item).ok_or_else(|| err(format!("unknown type {item}")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| err("property before element".into()))?
                    .properties
                    .push(Property::List {
                        name: name.to_string(),
                        count,
                        item,
                    });
            }
            ["property", ty, name] => {
                let ty = Scalar::parse(ty).ok_or_else(|| err(format!("unknown type {ty}")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| err("property before element".into()))?
                    .properties
                    .push(Property::Scalar {
                        name: name.to_string(),
                        ty,
                    });
            }
            ["end_header"] => break ln,
            _ => return Err(err(format!("unrecognized header line {line:?}"))),
        }
    };
    let encoding = encoding.ok_or_else(|| MeshError::Parse {
        line: header_end,
        message: "missing format line".into(),
    })?;

    match encoding {
        Encoding::Ascii => read_body(
            &elements,
            &mut AsciiSource {
                reader,
                line: header_end,
                tokens: Vec::new(),
                pos: 0,
            },
        ),
        Encoding::BinaryLe => read_body(
            &elements,
            &mut BinarySource {
                reader,
                offset: 0,
                header_lines: header_end,
            },
        ),
    }
}

fn read_body(elements: &[Element], src: &mut dyn ValueSource) -> Result<Mesh, MeshError> {
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut uvs = Vec::new();
    let mut has_normals = false;
    let mut has_uvs = false;
    let mut faces: Vec<(usize, Vec<u32>)> = Vec::new();

    for element in elements {
        let is_vertex = element.name == "vertex";
        let is_face = element.name == "face";
        if is_vertex {
            let names: Vec<&str> = element
                .properties
                .iter()
                .map(|p| match p {
                    Property::Scalar { name, .. } | Property::List { name, .. } => name.as_str(),
                })
                .collect();
            has_normals = ["nx", "ny", "nz"].iter().all(|n| names.contains(n));
            has_uvs = names.iter().any(|n| matches!(*n, "u" | "s" | "texture_u" | "texture_s"));
        }
        for _ in 0..element.count {
            let mut p = Vec3::zeros();
            let mut n = Vec3::zeros();
            let mut uv = [0.0; 2];
            for prop in &element.properties {
                match prop {
                    Property::Scalar { name, ty } => {
                        let v = src.next(*ty)?;
                        if is_vertex {
                            match name.as_str() {
                                "x" => p.x = v,
                                "y" => p.y = v,
                                "z" => p.z = v,
                                "nx" => n.x = v,
                                "ny" => n.y = v,
                                "nz" => n.z = v,
                                "u" | "s" | "texture_u" | "texture_s" => uv[0] = v,
                                "v" | "t" | "texture_v" | "texture_t" => uv[1] = v,
                                _ => {}
                            }
                        }
                    }
                    Property::List { name, count, item } => {
                        let line = src.location();
                        let len = src.next(*count)?;
                        if !(len >= 0.0) {
                            return Err(MeshError::Parse {
                                line,
                                message: format!("negative list length {len}"),
                            });
                        }
                        let mut values = Vec::with_capacity(len as usize);
                        for _ in 0..len as usize {
                            values.push(src.next(*item)?);
                        }
                        if is_face && (name == "vertex_indices" || name == "vertex_index") {
                            let idx = values
                                .iter()
                                .map(|&v| {
                                    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                                        Ok(v as u32)
                                    } else {
                                        Err(MeshError::Parse {
                                            line,
                                            message: format!("invalid vertex index {v}"),
                                        })
                                    }
                                })
                                .collect::<Result<Vec<_>, _>>()?;
                            faces.push((line, idx));
                        }
                    }
                }
            }
            if is_vertex {
                positions.push(p);
                normals.push(n);
                uvs.push(uv);
            }
        }
    }

    let mut triangles = Vec::new();
    for (line, face) in &faces {
        if let Some(&bad) = face.iter().find(|&&i| i as usize >= positions.len()) {
            return Err(MeshError::Parse {
                line: *line,
                message: format!("vertex index {bad} out of range (have {})", positions.len()),
            });
        }
        triangles.extend(fan_triangulate(&positions, face, *line)?);
    }
    let normals = if has_normals {
        normals
            .into_iter()
            .map(|n| {
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
    let uvs = if has_uvs { uvs } else { Vec::new() };
    Mesh::new(positions, normals, uvs, triangles, 1)
}

/// Writes an ASCII PLY with double-precision attributes. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_ply(mesh: &Mesh, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", mesh.vertices.len())?;
    for name in ["x", "y", "z", "nx", "ny", "nz", "texture_u", "texture_v"] {
        writeln!(w, "property double {name}")?;
    }
    writeln!(w, "element face {}", mesh.triangles.len())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "end_header")?;
    for ((p, n), uv) in mesh.vertices.iter().zip(&mesh.normals).zip(&mesh.uvs) {
        writeln!(w, "{} {} {} {} {} {} {} {}", p.x, p.y, p.z, n.x, n.y, n.z, uv[0], uv[1])?;
    }
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}
