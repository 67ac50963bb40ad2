//! STL (binary and ASCII) and OBJ ingestion, binary STL export.

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::Point3;
use std::collections::HashMap;
use std::io::{Cursor, Write};
use std::path::Path;

use super::{GeometryError, SemanticLabel, TriMesh};

/// Welds exactly-equal vertices while building an indexed mesh.
#[derive(Default)]
struct Welder {
    index: HashMap<[u64; 3], u32>,
    vertices: Vec<Point3<f64>>,
}

impl Welder {
    fn push(&mut self, p: Point3<f64>) -> u32 {
        let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        *self.index.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            (self.vertices.len() - 1) as u32
        })
    }
}

fn parse_err(msg: impl Into<String>) -> GeometryError {
    GeometryError::Parse(msg.into())
}

/// Loads `.stl` or `.obj` by extension.
pub fn load_mesh(path: &Path) -> Result<TriMesh, GeometryError> {
    let bytes = std::fs::read(path).map_err(|e| GeometryError::Io(format!("{}: {e}", path.display())))?;
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref() {
        Some("obj") => parse_obj(std::str::from_utf8(&bytes).map_err(|e| parse_err(e.to_string()))?),
        _ => parse_stl(&bytes),
    }
}

/// Detects binary STL by its exact size; anything else must be ASCII.
pub fn parse_stl(bytes: &[u8]) -> Result<TriMesh, GeometryError> {
    if bytes.len() >= 84 {
        let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
        if bytes.len() == 84 + 50 * n {
            return parse_stl_binary(bytes, n);
        }
    }
    let text = std::str::from_utf8(bytes).map_err(|_| parse_err("STL is neither valid binary nor ASCII"))?;
    if !text.trim_start().starts_with("solid") {
        return Err(parse_err("STL is neither valid binary nor ASCII"));
    }
    parse_stl_ascii(text)
}

fn parse_stl_binary(bytes: &[u8], n: usize) -> Result<TriMesh, GeometryError> {
    let mut cur = Cursor::new(&bytes[84..]);
    let mut welder = Welder::default();
    let mut tris = Vec::with_capacity(n);
    let io = |e: std::io::Error| parse_err(e.to_string());
    for _ in 0..n {
        for _ in 0..3 {
            cur.read_f32::<LittleEndian>().map_err(io)?;
        }
        let mut t = [0u32; 3];
        for slot in &mut t {
            let x = cur.read_f32::<LittleEndian>().map_err(io)? as f64;
            let y = cur.read_f32::<LittleEndian>().map_err(io)? as f64;
            let z = cur.read_f32::<LittleEndian>().map_err(io)? as f64;
            *slot = welder.push(Point3::new(x, y, z));
        }
        cur.read_u16::<LittleEndian>().map_err(io)?;
        tris.push(t);
    }
    TriMesh::new(welder.vertices, tris, 0, SemanticLabel::Environment)
}

fn parse_stl_ascii(text: &str) -> Result<TriMesh, GeometryError> {
    let mut welder = Welder::default();
    let mut tris = Vec::new();
    let mut pending: Vec<u32> = Vec::with_capacity(3);
    for (n, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("vertex") => {
                let c: Vec<f64> = it.map(|s| s.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| parse_err(format!("STL line {}: bad vertex", n + 1)))?;
                if c.len() != 3 {
                    return Err(parse_err(format!("STL line {}: vertex needs 3 coordinates", n + 1)));
                }
                pending.push(welder.push(Point3::new(c[0], c[1], c[2])));
            }
            Some("endloop") => {
                if pending.len() != 3 {
                    return Err(parse_err(format!("STL line {}: facet with {} vertices", n + 1, pending.len())));
                }
                tris.push([pending[0], pending[1], pending[2]]);
                pending.clear();
            }
            _ => {}
        }
    }
    if !pending.is_empty() {
        return Err(parse_err("STL ends inside a facet"));
    }
    TriMesh::new(welder.vertices, tris, 0, SemanticLabel::Environment)
}

/// OBJ `v`/`f` records; 1-based indices, polygons fan-triangulated.
pub fn parse_obj(text: &str) -> Result<TriMesh, GeometryError> {
    let mut vertices = Vec::new();
    let mut tris = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| parse_err(format!("OBJ line {}: bad vertex", n + 1)))?;
                if c.len() != 3 {
                    return Err(parse_err(format!("OBJ line {}: vertex needs 3 coordinates", n + 1)));
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<u32> = it
                    .map(|tok| {
                        let first = tok.split('/').next().unwrap_or("");
                        match first.parse::<u32>() {
                            Ok(i) if i >= 1 => Ok(i - 1),
                            _ => Err(parse_err(format!("OBJ line {}: bad face index {tok:?}", n + 1))),
                        }
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(format!("OBJ line {}: face with {} vertices", n + 1, idx.len())));
                }
                for k in 1..idx.len() - 1 {
                    tris.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, tris, 0, SemanticLabel::Environment)
}

pub fn write_stl_binary<W: Write>(mesh: &TriMesh, mut w: W) -> std::io::Result<()> {
    let mut header = [0u8; 80];
    header[..11].copy_from_slice(b"grade-forge");
    w.write_all(&header)?;
    w.write_u32::<LittleEndian>(mesh.triangles().len() as u32)?;
    for t in mesh.triangle_iter() {
        let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
        let n = if n.norm() > 0.0 { n.normalize() } else { n };
        for c in n.iter() {
            w.write_f32::<LittleEndian>(*c as f32)?;
        }
        for p in &t {
            for c in p.coords.iter() {
                w.write_f32::<LittleEndian>(*c as f32)?;
            }
        }
        w.write_u16::<LittleEndian>(0)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::unit_cube;
    use nalgebra::Vector3;

    #[test]
    fn binary_round_trip_welds_vertices() {
        let cube = unit_cube(Vector3::new(1.0, 2.0, 3.0));
        let mut buf = Vec::new();
        write_stl_binary(&cube, &mut buf).unwrap();
        assert_eq!(buf.len(), 84 + 50 * 12);
        let back = parse_stl(&buf).unwrap();
        assert_eq!(back.triangles().len(), 12);
        assert_eq!(back.vertices().len(), 8);
        assert_eq!(back.aabb(), cube.aabb());
    }

    #[test]
    fn ascii_stl() {
        let text = "solid t\nfacet normal 0 0 1\n outer loop\n  vertex 0 0 0\n  vertex 1 0 0\n  vertex 0 1 0\n endloop\nendfacet\nendsolid t\n";
        let m = parse_stl(text.as_bytes()).unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2]]);
    }

    #[test]
    fn corrupt_stl_fails() {
        assert!(parse_stl(b"\x00\x01garbage").is_err());
        let mut buf = Vec::new();
        write_stl_binary(&unit_cube(Vector3::zeros()), &mut buf).unwrap();
        buf.truncate(buf.len() - 7);
        assert!(parse_stl(&buf).is_err());
    }

    #[test]
    fn obj_fan_triangulation() {
        let text = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3 4/4/4\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3]]);
        assert!(parse_obj("v 0 0 0\nf 0 1 2\n").is_err());
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
    }
}
