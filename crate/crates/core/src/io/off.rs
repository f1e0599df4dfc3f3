//! ASCII OFF with two trailing integers per face holding the region pair.
//!
//! Coordinates are written in shortest round-trip form, so
//! write → read → write is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Label, LabeledMesh, Vec3};

pub fn write_off_string(mesh: &LabeledMesh) -> String {
    let mut s = String::with_capacity(64 * (mesh.num_vertices() + mesh.num_faces()));
    s.push_str("OFF\n");
    let _ = writeln!(s, "{} {} 0", mesh.num_vertices(), mesh.num_faces());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", v.x, v.y, v.z);
    }
    for (f, l) in mesh.faces.iter().zip(&mesh.labels) {
        let _ = writeln!(s, "3 {} {} {} {} {}", f[0], f[1], f[2], l.lo, l.hi);
    }
    s
}

pub fn write_off(mesh: &LabeledMesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_off_string(mesh))?;
    Ok(())
}

pub fn read_off(path: &Path) -> Result<LabeledMesh> {
    parse_off(&std::fs::read_to_string(path)?)
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        line,
        msg: msg.into(),
    }
}

pub fn parse_off(text: &str) -> Result<LabeledMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    if header != "OFF" {
        return Err(err(ln, format!("expected `OFF`, found `{header}`")));
    }
    let (ln, counts) = lines.next().ok_or_else(|| err(ln + 1, "missing counts line"))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(ln, format!("bad count `{t}`"))))
        .collect::<Result<_>>()?;
    if counts.len() != 3 {
        return Err(err(ln, "counts line needs `nv nf ne`"));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut mesh = LabeledMesh::default();
    mesh.vertices.reserve(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "unexpected end of vertices"))?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(ln, format!("bad coordinate `{t}`"))))
            .collect::<Result<_>>()?;
        if xs.len() != 3 {
            return Err(err(ln, "vertex needs 3 coordinates"));
        }
        mesh.vertices.push(Vec3::new(xs[0], xs[1], xs[2]));
    }
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "unexpected end of faces"))?;
        let xs: Vec<u32> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(ln, format!("bad integer `{t}`"))))
            .collect::<Result<_>>()?;
        if xs.len() != 6 || xs[0] != 3 {
            return Err(err(ln, "face must be `3 a b c lo hi`"));
        }
        if xs[1..4].iter().any(|&v| v as usize >= nv) {
            return Err(err(ln, "vertex index out of range"));
        }
        if xs[4] == xs[5] {
            return Err(err(ln, "face label needs two distinct regions"));
        }
        mesh.faces.push([xs[1], xs[2], xs[3]]);
        mesh.labels.push(Label::new(xs[4], xs[5]));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing data after faces"));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_identical() {
        let m = LabeledMesh::new(
            vec![
                Vec3::new(0.1, -0.0, 1e-300),
                Vec3::new(1.0 / 3.0, 2.0, -7.25),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
            vec![Label::new(2, 1)],
        );
        let s = write_off_string(&m);
        let back = parse_off(&s).unwrap();
        assert_eq!(back, m);
        assert_eq!(write_off_string(&back), s);
    }

    #[test]
    fn bad_header_reports_line() {
        match parse_off("\nPLY\n") {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_label_is_rejected() {
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").is_err());
    }
}
