//! ASCII OFF and OBJ readers, OFF writer.
//!
//! Only triangles are accepted. OBJ texture and normal references
//! (`f 1/2/3 ...`) are ignored; negative (relative) indices are rejected.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Point3;

use super::Mesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(MeshFormat::Off),
            "obj" => Ok(MeshFormat::Obj),
            other => Err(format!("unknown mesh format '{other}'")),
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<Mesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        MeshFormat::Off => parse_off(&text),
        MeshFormat::Obj => parse_obj(&text),
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number<T: FromStr>(token: &str, line: usize) -> Result<T> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid number '{token}'")))
}

/// Parses ASCII OFF text.
pub fn parse_off(text: &str) -> Result<Mesh> {
    // (1-based line number, tokens) with comments and blank lines stripped
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then(|| (i + 1, content.split_whitespace().collect::<Vec<_>>()))
    });

    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if header[0] != "OFF" {
        return Err(parse_err(line, format!("expected 'OFF' header, found '{}'", header[0])));
    }
    // counts may share the header line
    let (line, counts) = if header.len() > 1 {
        (line, header[1..].to_vec())
    } else {
        lines.next().ok_or_else(|| parse_err(line, "missing counts line"))?
    };
    if counts.len() < 2 {
        return Err(parse_err(line, "counts line needs vertex and face counts"));
    }
    let nv: usize = number(counts[0], line)?;
    let nf: usize = number(counts[1], line)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, tok) = lines
            .next()
            .ok_or_else(|| parse_err(0, "unexpected end of file in vertex block"))?;
        if tok.len() < 3 {
            return Err(parse_err(line, "vertex line needs three coordinates"));
        }
        vertices.push(Point3::new(
            number(tok[0], line)?,
            number(tok[1], line)?,
            number(tok[2], line)?,
        ));
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, tok) = lines
            .next()
            .ok_or_else(|| parse_err(0, "unexpected end of file in face block"))?;
        let arity: usize = number(tok[0], line)?;
        if arity != 3 {
            return Err(parse_err(
                line,
                format!("only triangles are supported, found {arity}-gon"),
            ));
        }
        if tok.len() < 4 {
            return Err(parse_err(line, "face line needs three indices"));
        }
        let mut face = [0usize; 3];
        for (slot, t) in face.iter_mut().zip(&tok[1..4]) {
            *slot = number(t, line)?;
            if *slot >= nv {
                return Err(parse_err(
                    line,
                    format!("face index {slot} out of range for {nv} vertices"),
                ));
            }
        }
        faces.push(face);
    }

    let mesh = Mesh::new(vertices, faces)?;
    if mesh.dropped_faces() > 0 {
        log::warn!("dropped {} degenerate faces", mesh.dropped_faces());
    }
    Ok(mesh)
}

/// Parses Wavefront OBJ text (positions and triangular faces only).
pub fn parse_obj(text: &str) -> Result<Mesh> {
    let mut vertices = Vec::new();
    let mut faces: Vec<([usize; 3], usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tok = content.split_whitespace();
        match tok.next() {
            Some("v") => {
                let coords: Vec<&str> = tok.collect();
                if coords.len() < 3 {
                    return Err(parse_err(line, "vertex needs three coordinates"));
                }
                vertices.push(Point3::new(
                    number(coords[0], line)?,
                    number(coords[1], line)?,
                    number(coords[2], line)?,
                ));
            }
            Some("f") => {
                let refs: Vec<&str> = tok.collect();
                if refs.len() != 3 {
                    return Err(parse_err(
                        line,
                        format!("only triangles are supported, found {} references", refs.len()),
                    ));
                }
                let mut face = [0usize; 3];
                for (slot, r) in face.iter_mut().zip(&refs) {
                    let index = r.split('/').next().unwrap_or("");
                    let value: i64 = number(index, line)?;
                    if value <= 0 {
                        return Err(parse_err(line, format!("face index {value} must be positive")));
                    }
                    *slot = (value - 1) as usize;
                }
                faces.push((face, line));
            }
            _ => {}
        }
    }
    let nv = vertices.len();
    for (face, line) in &faces {
        if let Some(bad) = face.iter().find(|&&v| v >= nv) {
            return Err(parse_err(
                *line,
                format!("face index {} out of range for {nv} vertices", bad + 1),
            ));
        }
    }
    let mesh = Mesh::new(vertices, faces.into_iter().map(|(f, _)| f).collect())?;
    if mesh.dropped_faces() > 0 {
        log::warn!("dropped {} degenerate faces", mesh.dropped_faces());
    }
    Ok(mesh)
}

/// Serializes to OFF. Coordinates use the shortest decimal form that reads
/// back to the same `f64`, so a save/load cycle is bit-exact.
pub fn write_off(mesh: &Mesh) -> String {
    let mut out = String::new();
    writeln!(out, "OFF").unwrap();
    writeln!(
        out,
        "{} {} {}",
        mesh.vertex_count(),
        mesh.face_count(),
        mesh.edges().len()
    )
    .unwrap();
    for p in mesh.vertices() {
        writeln!(out, "{:?} {:?} {:?}", p.x, p.y, p.z).unwrap();
    }
    for f in mesh.faces() {
        writeln!(out, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    out
}

pub fn save_off(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(write_off(mesh).as_bytes()).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use proptest::prelude::*;

    const TETRA_OFF: &str =
        "OFF\n# regular tetrahedron\n4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";

    #[test]
    fn single_triangle_off() {
        let mesh = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!(mesh.vertex_count(), 3);
        assert_eq!(mesh.boundary_vertex_count(), 3);
    }

    #[test]
    fn tetrahedron_off() {
        let mesh = parse_off(TETRA_OFF).unwrap();
        assert_eq!((mesh.vertex_count(), mesh.face_count()), (4, 4));
        assert_eq!(mesh.boundary_vertex_count(), 0);
    }

    #[test]
    fn off_index_out_of_range() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 7\n";
        match parse_off(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn off_rejects_quads_and_garbage() {
        assert!(matches!(
            parse_off("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(parse_off("PLY\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_off("OFF\n3 1 0\n0 0 zero\n1 0 0\n0 1 0\n3 0 1 2\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(parse_off("OFF\n3 1 0\n0 0 0\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn off_counts_on_header_line() {
        let mesh = parse_off("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!(mesh.face_count(), 1);
    }

    #[test]
    fn obj_ignores_attributes_and_rejects_negative() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1/1/1 2/1/1 3/1/1\n";
        let mesh = parse_obj(text).unwrap();
        assert_eq!(mesh.face_count(), 1);
        let neg = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n";
        assert!(matches!(parse_obj(neg), Err(Error::Parse { line: 4, .. })));
        let range = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n";
        assert!(matches!(parse_obj(range), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn load_reads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.off");
        std::fs::write(&path, TETRA_OFF).unwrap();
        let mesh = load_mesh(&path, MeshFormat::from_path(&path).unwrap()).unwrap();
        assert_eq!(mesh.face_count(), 4);
        assert!(matches!(
            load_mesh(dir.path().join("missing.off"), MeshFormat::Off),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn off_round_trip_is_bit_exact(seed in 0u64..1000, scale in 1e-6f64..1e6) {
            let base = shapes::perturbed_sphere(1, 0.2, seed);
            let mesh = base.scaled(scale);
            let again = parse_off(&write_off(&mesh)).unwrap();
            prop_assert_eq!(again.faces(), mesh.faces());
            for (a, b) in again.vertices().iter().zip(mesh.vertices()) {
                for axis in 0..3 {
                    prop_assert_eq!(a[axis].to_bits(), b[axis].to_bits());
                }
            }
        }
    }
}
