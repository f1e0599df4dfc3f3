//! Lined-up triple bubble: a middle cell cut by two planes, with a
//! double-bubble lobe attached across each plane.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::delaunay::capillary_band;
use super::double::{add_disk, add_lobe, Rim};
use super::lattice::{Facing, LatticeMesher, RadiusProfile, Surface};
use super::solve::{lined_up_middle_volume, solve_double_bubble_radius};
use super::triple::split_quad;
use super::{expect_kind, finish_cluster, nearly_equal, ConfigurationKind, ConfigurationSpec, LinedUpBranch};
use crate::error::{Error, Result};
use crate::geometry::{Cluster, Construction, Label, LabeledMesh, Vec3};

const DEFAULT_WEDGE_DEG: f64 = 30.0;

/// Band of the middle cell between two hexagons, `a[k]` and `b[k]` aligned.
/// Shared vertices collapse their quad to a triangle.
fn band_faces(m: &LatticeMesher, a: &[u32; 6], b: &[u32; 6]) -> Vec<[u32; 3]> {
    let mut faces = Vec::new();
    for k in 0..6 {
        let k1 = (k + 1) % 6;
        if a[k] == b[k] {
            faces.push([a[k], a[k1], b[k1]]);
        } else if a[k1] == b[k1] {
            faces.push([a[k], a[k1], b[k]]);
        } else {
            split_quad(m, [a[k], a[k1], b[k1], b[k]], &mut faces);
        }
    }
    faces
}

/// Wedge branch: planes through the z-axis at azimuth `±β/2`, middle center
/// on the bisector. `β = 60°` is the point-contact member.
fn wedge_mesh(r: f64, beta: f64, freq: usize) -> (LabeledMesh, BTreeMap<String, f64>) {
    let mut m = LatticeMesher::new(freq);
    let half = beta / 2.0;
    let s = (r / 2.0) / half.sin();
    let c1 = Vec3::new(s, 0.0, 0.0);
    let rho = r * 3f64.sqrt() / 2.0;
    let point_contact = (beta - PI / 3.0).abs() < 1e-12;
    let mut hexes = Vec::new();
    let mut shared: Option<u32> = None;
    for sigma in [1.0, -1.0] {
        let u = Vec3::new(half.cos(), sigma * half.sin(), 0.0);
        let mut n = u.cross(&Vec3::z());
        if n.dot(&c1) > 0.0 {
            n = -n;
        }
        let center = c1 - n * (2.0 * c1.dot(&n));
        let rim = Rim {
            center: u * (s * half.cos()),
            radius: rho,
            e1: u,
            e2: Vec3::z(),
            theta0: 180.0,
        };
        let hex: [u32; 6] = std::array::from_fn(|k| match (k, shared) {
            (0, Some(p)) => p,
            (0, None) if point_contact => {
                let p = m.add_vertex(Vec3::zeros());
                shared = Some(p);
                p
            }
            _ => m.add_vertex(rim.point(rim.theta0 + 60.0 * k as f64)),
        });
        rim.register(&mut m, &hex);
        hexes.push((hex, rim, center, n));
    }
    for (region, (hex, rim, center, n)) in hexes.iter().enumerate() {
        let j = region as u32 + 2;
        add_lobe(&mut m, *center, r, *n, rim, hex, Label::new(0, j));
        add_disk(&mut m, rim, hex, *n, Label::new(1, j));
    }
    let faces = band_faces(&m, &hexes[0].0, &hexes[1].0);
    m.add_patch(
        &Surface::Sphere { center: c1, radius: r },
        Label::new(0, 1),
        Facing::TowardPoint(c1),
        &faces,
    );
    let mut p = BTreeMap::new();
    p.insert("wedge_angle_deg".into(), beta.to_degrees());
    p.insert("center_offset".into(), s);
    (m.finish(), p)
}

/// Parallel branch: planes `z = ±D/2`, middle surface a Delaunay band of
/// mean curvature `2/r` meeting each plane at 120°.
fn parallel_mesh(r: f64, freq: usize) -> Result<(LabeledMesh, BTreeMap<String, f64>)> {
    let lambda = 2.0 / r;
    let rho = r * 3f64.sqrt() / 2.0;
    let band = capillary_band(lambda, rho, PI / 6.0)?;
    let height = band.samples.last().map(|p| p.z).unwrap_or(0.0);
    let profile = RadiusProfile {
        samples: band
            .samples
            .iter()
            .map(|p| (p.z - height / 2.0, p.r, p.tangent[0] / p.tangent[1]))
            .collect(),
    };
    let mut m = LatticeMesher::new(freq);
    let mut hexes = Vec::new();
    for (j, sign) in [(2u32, 1.0), (3u32, -1.0)] {
        let n = Vec3::z() * sign;
        let rim = Rim {
            center: n * (height / 2.0),
            radius: rho,
            e1: Vec3::x(),
            e2: Vec3::y(),
            theta0: 0.0,
        };
        let hex = rim.add_hexagon(&mut m);
        let center = rim.center + n * (r / 2.0);
        add_lobe(&mut m, center, r, n, &rim, &hex, Label::new(0, j));
        add_disk(&mut m, &rim, &hex, n, Label::new(1, j));
        hexes.push(hex);
    }
    let faces = band_faces(&m, &hexes[0], &hexes[1]);
    m.add_patch(
        &Surface::Revolution {
            origin: Vec3::zeros(),
            axis: Vec3::z(),
            profile: Arc::new(profile),
        },
        Label::new(0, 1),
        Facing::TowardPoint(Vec3::zeros()),
        &faces,
    );
    let mut p = BTreeMap::new();
    p.insert("plane_distance".into(), height);
    p.insert("shape_parameter".into(), band.shape_parameter);
    p.insert("max_cmc_residual".into(), band.max_cmc_residual());
    let end = band.samples.last().map(|s| s.psi()).unwrap_or(0.0);
    p.insert("start_tangent_deg".into(), 30.0);
    p.insert("end_tangent_deg".into(), end.to_degrees());
    Ok((m.finish(), p))
}

pub fn build_lined_up_triple(spec: &ConfigurationSpec) -> Result<Cluster> {
    expect_kind(spec, ConfigurationKind::LinedUpTriple)?;
    let v = &spec.volumes;
    if !nearly_equal(v[1], v[2]) {
        return Err(Error::InvalidSpec(format!(
            "the two outer cells of a lined-up triple bubble have equal volumes, got {} and {}",
            v[1], v[2]
        )));
    }
    let r = solve_double_bubble_radius(v[1])?;
    let middle = lined_up_middle_volume(r);
    if (v[0] - middle).abs() > 1e-6 * middle {
        return Err(Error::VolumeOutOfRange {
            requested: v[0],
            feasible: LinedUpBranch::ALL
                .iter()
                .map(|b| format!("{}: [{middle}, {middle}]", b.as_str()))
                .collect::<Vec<_>>()
                .join("; "),
        });
    }
    let branch = spec.branch.ok_or_else(|| Error::BranchAmbiguity {
        requested: v[0],
        branches: LinedUpBranch::ALL.iter().map(|b| b.as_str().to_string()).collect(),
    })?;
    if spec.wedge_angle_deg.is_some() && branch != LinedUpBranch::NonParallel {
        return Err(Error::InvalidSpec("wedge_angle_deg applies to the non_parallel branch only".into()));
    }
    let freq = spec.resolution.frequency(r)?;
    let (mesh, mut parameters) = match branch {
        LinedUpBranch::NonParallel => {
            let beta = spec.wedge_angle_deg.unwrap_or(DEFAULT_WEDGE_DEG);
            if !(beta > 0.0 && beta < 60.0) {
                return Err(Error::InvalidSpec(format!(
                    "non_parallel wedge angle must lie in (0, 60) degrees, got {beta}"
                )));
            }
            wedge_mesh(r, beta.to_radians(), freq)
        }
        LinedUpBranch::PointContact => wedge_mesh(r, PI / 3.0, freq),
        LinedUpBranch::Parallel => parallel_mesh(r, freq)?,
    };
    parameters.insert("lambda".into(), 2.0 / r);
    finish_cluster(
        spec,
        mesh,
        Construction {
            kind: spec.kind.as_str().into(),
            branch: branch.as_str().into(),
            radii: vec![r; 3],
            frequency: freq,
            parameters,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::Resolution;
    use crate::geometry::measure::compute_volume;

    fn spec(branch: Option<LinedUpBranch>) -> ConfigurationSpec {
        let lobe = 9.0 * PI / 8.0;
        let mut s = ConfigurationSpec::new(
            ConfigurationKind::LinedUpTriple,
            vec![11.0 * PI / 12.0, lobe, lobe],
            Resolution::Absolute(0.08),
        );
        s.branch = branch;
        s
    }

    #[test]
    fn every_branch_meshes_closed_regions() {
        for b in LinedUpBranch::ALL {
            let c = build_lined_up_triple(&spec(Some(b))).unwrap();
            c.mesh.validate().unwrap();
            for (i, &t) in c.target_volumes.iter().enumerate() {
                let v = compute_volume(&c.mesh, i as u32 + 1).unwrap();
                assert!((v / t - 1.0).abs() < 1e-2, "{b:?} region {}: {v} vs {t}", i + 1);
            }
        }
    }

    #[test]
    fn missing_branch_is_ambiguous() {
        assert!(matches!(build_lined_up_triple(&spec(None)), Err(Error::BranchAmbiguity { .. })));
    }

    #[test]
    fn infeasible_middle_volume() {
        let mut s = spec(Some(LinedUpBranch::Parallel));
        s.volumes[0] *= 1.5;
        assert!(matches!(build_lined_up_triple(&s), Err(Error::VolumeOutOfRange { .. })));
    }
}
