//! Standard triple bubble: three equal balls cut by three half-planes that
//! meet at 120° along a common line.

use std::collections::BTreeMap;

use super::lattice::{EdgeCurve, Facing, LatticeMesher, Surface};
use super::solve::solve_standard_triple_radius;
use super::{expect_kind, finish_cluster, nearly_equal, ConfigurationKind, ConfigurationSpec};
use crate::error::{Error, Result};
use crate::geometry::{Cluster, Construction, Label, LabeledMesh, Vec3};

fn azimuth(deg: f64) -> Vec3 {
    let a = deg.to_radians();
    Vec3::new(a.cos(), a.sin(), 0.0)
}

/// Splits quad `a b c d` (in cyclic order) along its shorter diagonal.
pub(crate) fn split_quad(m: &LatticeMesher, [a, b, c, d]: [u32; 4], out: &mut Vec<[u32; 3]>) {
    let ac = (m.position(a) - m.position(c)).norm();
    let bd = (m.position(b) - m.position(d)).norm();
    if ac <= bd {
        out.extend([[a, b, c], [a, c, d]]);
    } else {
        out.extend([[a, b, d], [b, c, d]]);
    }
}

/// Triple bubble mesh for sphere radius `r`, triple line along the z-axis.
pub(crate) fn standard_triple_mesh(r: f64, freq: usize) -> LabeledMesh {
    let mut m = LatticeMesher::new(freq);
    let d = r / 3f64.sqrt();
    let rho = r * 3f64.sqrt() / 2.0;
    let alpha_t = (-1.0f64 / 3.0).acos();
    let zt = r * (2.0f64 / 3.0).sqrt();
    let top = m.add_vertex(Vec3::new(0.0, 0.0, zt));
    let mid = m.add_vertex(Vec3::zeros());
    let bottom = m.add_vertex(Vec3::new(0.0, 0.0, -zt));
    m.register_chain(&[top, mid, bottom], false, EdgeCurve::Line);

    let centers: [Vec3; 3] = std::array::from_fn(|i| azimuth(120.0 * i as f64) * d);

    // interface i separates region i+1 from region (i+1)%3+1
    let mut arcs: Vec<[u32; 5]> = Vec::with_capacity(3);
    for i in 0..3 {
        let u = azimuth(120.0 * i as f64 + 60.0);
        let q = u * (d / 2.0);
        let point = |a: f64| q + (u * a.cos() + Vec3::z() * a.sin()) * rho;
        let mut arc = [top; 5];
        for (j, slot) in arc.iter_mut().enumerate().skip(1).take(3) {
            *slot = m.add_vertex(point(alpha_t * (1.0 - j as f64 / 2.0)));
        }
        arc[4] = bottom;
        m.register_chain(&arc, false, EdgeCurve::Circle { center: q, radius: rho });
        let qid = m.add_vertex(q);
        let (a, b) = (i as u32 + 1, (i as u32 + 1) % 3 + 1);
        let label = Label::new(a, b);
        let c_hi = centers[label.hi as usize - 1];
        let mut normal = Vec3::z().cross(&u);
        if normal.dot(&(c_hi - q)) < 0.0 {
            normal = -normal;
        }
        let mut faces: Vec<[u32; 3]> = (0..4).map(|j| [qid, arc[j], arc[j + 1]]).collect();
        faces.push([qid, bottom, mid]);
        faces.push([qid, mid, top]);
        m.add_patch(&Surface::Plane { point: q, normal }, label, Facing::Direction(normal), &faces);
        arcs.push(arc);
    }

    let gamma_t = (-1.0 / 3f64.sqrt()).acos();
    for i in 0..3 {
        let c = centers[i];
        let e = azimuth(120.0 * i as f64);
        let spine: [u32; 5] = std::array::from_fn(|j| match j {
            0 => top,
            4 => bottom,
            _ => {
                let g = gamma_t * (1.0 - j as f64 / 2.0);
                m.add_vertex(c + (e * g.cos() + Vec3::z() * g.sin()) * r)
            }
        });
        let mut faces = Vec::with_capacity(12);
        for arc in [arcs[i], arcs[(i + 2) % 3]] {
            faces.push([arc[0], arc[1], spine[1]]);
            split_quad(&m, [arc[1], arc[2], spine[2], spine[1]], &mut faces);
            split_quad(&m, [arc[2], arc[3], spine[3], spine[2]], &mut faces);
            faces.push([arc[3], arc[4], spine[3]]);
        }
        m.add_patch(
            &Surface::Sphere { center: c, radius: r },
            Label::new(0, i as u32 + 1),
            Facing::TowardPoint(c),
            &faces,
        );
    }
    m.finish()
}

pub fn build_standard_triple(spec: &ConfigurationSpec) -> Result<Cluster> {
    expect_kind(spec, ConfigurationKind::StandardTriple)?;
    let v = &spec.volumes;
    if !(nearly_equal(v[0], v[1]) && nearly_equal(v[0], v[2])) {
        return Err(Error::NonEqualVolumes(v.clone()));
    }
    let r = solve_standard_triple_radius(v[0])?;
    let freq = spec.resolution.frequency(r)?;
    let mesh = standard_triple_mesh(r, freq);
    let mut parameters = BTreeMap::new();
    parameters.insert("lambda".into(), 2.0 / r);
    parameters.insert("center_offset".into(), r / 3f64.sqrt());
    parameters.insert("triple_line_length".into(), 2.0 * r * (2.0f64 / 3.0).sqrt());
    finish_cluster(
        spec,
        mesh,
        Construction {
            kind: spec.kind.as_str().into(),
            branch: "wedge_120".into(),
            radii: vec![r; 3],
            frequency: freq,
            parameters,
        },
    )
}
