use std::collections::BTreeMap;

use nalgebra::Rotation3;

use super::lattice::{icosahedron, Facing, LatticeMesher, Surface};
use super::solve::ball_radius;
use super::{expect_kind, finish_cluster, ConfigurationKind, ConfigurationSpec};
use crate::error::{Error, Result};
use crate::geometry::{Cluster, Construction, Label, LabeledMesh, Vec3};

/// Geodesic sphere from a frequency-`freq` subdivided icosahedron, rotated by
/// `rot` before placement, bounding `region`.
pub fn icosphere(center: Vec3, radius: f64, freq: usize, rot: &Rotation3<f64>, region: u32) -> LabeledMesh {
    let (verts, faces) = icosahedron();
    let mut m = LatticeMesher::new(freq);
    for v in verts {
        m.add_vertex(center + rot * v * radius);
    }
    m.add_patch(
        &Surface::Sphere { center, radius },
        Label::new(0, region),
        Facing::TowardPoint(center),
        &faces,
    );
    m.finish()
}

pub fn build_disjoint_balls(spec: &ConfigurationSpec) -> Result<Cluster> {
    expect_kind(spec, ConfigurationKind::DisjointBalls)?;
    let radii = spec.volumes.iter().map(|&v| ball_radius(v)).collect::<Result<Vec<_>>>()?;
    let placement = spec.placement();
    let tangent = placement.is_tangent();
    let r_max = radii.iter().cloned().fold(0.0, f64::max);
    let centers: Vec<Vec3> = match &placement.centers {
        Some(cs) => {
            if cs.len() != radii.len() {
                return Err(Error::InvalidSpec(format!(
                    "{} centers given for {} balls",
                    cs.len(),
                    radii.len()
                )));
            }
            cs.iter().map(|&c| Vec3::from(c)).collect()
        }
        None => {
            let gap = if tangent { 0.0 } else { placement.gap.unwrap_or(0.5 * r_max) };
            let mut x = 0.0;
            let mut out = Vec::with_capacity(radii.len());
            for (i, &r) in radii.iter().enumerate() {
                if i > 0 {
                    x += radii[i - 1] + gap + r;
                }
                out.push(Vec3::new(x, 0.0, 0.0));
            }
            out
        }
    };
    for i in 0..radii.len() {
        for j in i + 1..radii.len() {
            let d = (centers[i] - centers[j]).norm();
            if d < (radii[i] + radii[j]) * (1.0 - 1e-12) {
                return Err(Error::OverlapError(format!(
                    "balls {} and {} overlap: center distance {d} < {}",
                    i + 1,
                    j + 1,
                    radii[i] + radii[j]
                )));
            }
        }
    }

    let r_min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let freq = spec.resolution.frequency(r_min)?;
    // icosahedron vertex 0 points along +x, so its antipode meets the next ball
    let (v, _) = icosahedron();
    let rot = Rotation3::rotation_between(&v[0], &Vec3::x()).expect("non-antipodal");
    let mut mesh = LabeledMesh::default();
    for (i, (&c, &r)) in centers.iter().zip(&radii).enumerate() {
        mesh.append(&icosphere(c, r, freq, &rot, i as u32 + 1));
    }
    let mut parameters = BTreeMap::new();
    if let Some(g) = placement.gap.filter(|_| !tangent) {
        parameters.insert("gap".into(), g);
    }
    finish_cluster(
        spec,
        mesh,
        Construction {
            kind: spec.kind.as_str().into(),
            branch: if tangent { "tangent" } else { "separated" }.into(),
            radii,
            frequency: freq,
            parameters,
        },
    )
}
