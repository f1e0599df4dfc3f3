//! Wavefront OBJ export with one `g i_j` group per label run.
//!
//! OBJ is a viewer format; OFF is the authoritative one.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Label, LabeledMesh, Vec3};

pub fn write_obj_string(mesh: &LabeledMesh) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    let mut current = None;
    for (f, l) in mesh.faces.iter().zip(&mesh.labels) {
        if current != Some(*l) {
            let _ = writeln!(s, "g {l}");
            current = Some(*l);
        }
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn write_obj(mesh: &LabeledMesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_obj_string(mesh))?;
    Ok(())
}

pub fn parse_obj(text: &str) -> Result<LabeledMesh> {
    let mut mesh = LabeledMesh::default();
    let mut label = None;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let fail = |msg: &str| Error::Format {
            line: ln,
            msg: msg.to_string(),
        };
        let mut toks = raw.split_whitespace();
        match toks.next() {
            Some("v") => {
                let xs: Vec<f64> = toks
                    .map(|t| t.parse().map_err(|_| fail("bad coordinate")))
                    .collect::<Result<_>>()?;
                if xs.len() < 3 {
                    return Err(fail("vertex needs 3 coordinates"));
                }
                mesh.vertices.push(Vec3::new(xs[0], xs[1], xs[2]));
            }
            Some("g") => {
                let name = toks.next().ok_or_else(|| fail("group without name"))?;
                label = Some(Label::parse(name).ok_or_else(|| fail("group name must be `i_j`"))?);
            }
            Some("f") => {
                let l = label.ok_or_else(|| fail("face before any `g i_j` group"))?;
                let idx: Vec<u32> = toks
                    .map(|t| {
                        t.split('/')
                            .next()
                            .and_then(|x| x.parse::<u32>().ok())
                            .filter(|&x| x >= 1 && x as usize <= mesh.vertices.len())
                            .map(|x| x - 1)
                            .ok_or_else(|| fail("bad face index"))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(fail("only triangles are supported"));
                }
                mesh.faces.push([idx[0], idx[1], idx[2]]);
                mesh.labels.push(l);
            }
            _ => {}
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_survive_round_trip() {
        let m = LabeledMesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()],
            vec![[0, 1, 2], [0, 1, 3], [0, 2, 3]],
            vec![Label::new(0, 1), Label::new(1, 2), Label::new(1, 2)],
        );
        let s = write_obj_string(&m);
        assert_eq!(s.matches("\ng ").count() + usize::from(s.starts_with("g ")), 2);
        assert_eq!(parse_obj(&s).unwrap(), m);
    }
}
