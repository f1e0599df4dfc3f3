//! Standard double bubble and a ball touching or next to one.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit};

use super::balls::icosphere;
use super::lattice::{EdgeCurve, Facing, LatticeMesher, Surface};
use super::solve::{ball_radius, solve_double_bubble_radius};
use super::{expect_kind, finish_cluster, nearly_equal, ConfigurationKind, ConfigurationSpec};
use crate::error::{Error, Result};
use crate::geometry::{Cluster, Construction, Label, LabeledMesh, Vec3};

/// Circle where a lobe meets its flat interface, in a local frame.
pub(crate) struct Rim {
    pub center: Vec3,
    pub radius: f64,
    pub e1: Vec3,
    pub e2: Vec3,
    /// Azimuth of the first hexagon vertex, degrees.
    pub theta0: f64,
}

impl Rim {
    pub fn point(&self, deg: f64) -> Vec3 {
        let a = deg.to_radians();
        self.center + (self.e1 * a.cos() + self.e2 * a.sin()) * self.radius
    }

    /// Adds the six hexagon vertices and registers the circle edges.
    pub fn add_hexagon(&self, m: &mut LatticeMesher) -> [u32; 6] {
        let ids = std::array::from_fn(|k| m.add_vertex(self.point(self.theta0 + 60.0 * k as f64)));
        self.register(m, &ids);
        ids
    }

    pub fn register(&self, m: &mut LatticeMesher, ids: &[u32; 6]) {
        m.register_chain(
            ids,
            true,
            EdgeCurve::Circle {
                center: self.center,
                radius: self.radius,
            },
        );
    }
}

/// Spherical cap of radius `r` about `center` bounded by `rim`, bulging along
/// unit `axis`, meshed from the rim hexagon, a middle ring and the pole.
pub(crate) fn add_lobe(m: &mut LatticeMesher, center: Vec3, r: f64, axis: Vec3, rim: &Rim, hex: &[u32; 6], label: Label) {
    let (s60, c60) = (PI / 3.0).sin_cos();
    let ring: [u32; 6] = std::array::from_fn(|k| {
        let a = (rim.theta0 + 60.0 * k as f64 + 30.0).to_radians();
        let dir = (rim.e1 * a.cos() + rim.e2 * a.sin()) * s60 + axis * c60;
        m.add_vertex(center + dir * r)
    });
    let pole = m.add_vertex(center + axis * r);
    let mut faces = Vec::with_capacity(18);
    for k in 0..6 {
        let k1 = (k + 1) % 6;
        faces.push([hex[k], hex[k1], ring[k]]);
        faces.push([hex[k1], ring[k1], ring[k]]);
        faces.push([ring[k], ring[k1], pole]);
    }
    m.add_patch(&Surface::Sphere { center, radius: r }, label, Facing::TowardPoint(center), &faces);
}

/// Flat disk bounded by `rim`, normal pointing from `label.lo` into `label.hi`.
pub(crate) fn add_disk(m: &mut LatticeMesher, rim: &Rim, hex: &[u32; 6], normal: Vec3, label: Label) {
    let o = m.add_vertex(rim.center);
    let faces: Vec<[u32; 3]> = (0..6).map(|k| [o, hex[k], hex[(k + 1) % 6]]).collect();
    m.add_patch(
        &Surface::Plane {
            point: rim.center,
            normal,
        },
        label,
        Facing::Direction(normal),
        &faces,
    );
}

/// Meshes the double bubble with lobe radius `r`: region 1 below the plane
/// `z = 0`, region 2 above it.
fn double_bubble_mesh(r: f64, freq: usize) -> LabeledMesh {
    let mut m = LatticeMesher::new(freq);
    let z = Vec3::z();
    let rim = Rim {
        center: Vec3::zeros(),
        radius: r * 3f64.sqrt() / 2.0,
        e1: Vec3::x(),
        e2: Vec3::y(),
        theta0: 0.0,
    };
    let hex = rim.add_hexagon(&mut m);
    add_lobe(&mut m, -z * (r / 2.0), r, -z, &rim, &hex, Label::new(0, 1));
    add_lobe(&mut m, z * (r / 2.0), r, z, &rim, &hex, Label::new(0, 2));
    add_disk(&mut m, &rim, &hex, z, Label::new(1, 2));
    m.finish()
}

fn check_equal_pair(v: &[f64]) -> Result<()> {
    if !nearly_equal(v[0], v[1]) {
        return Err(Error::InvalidSpec(format!(
            "a convex double bubble has a flat interface and so equal volumes, got {} and {}",
            v[0], v[1]
        )));
    }
    Ok(())
}

pub fn build_standard_double_bubble(spec: &ConfigurationSpec) -> Result<Cluster> {
    expect_kind(spec, ConfigurationKind::StandardDoubleBubble)?;
    check_equal_pair(&spec.volumes)?;
    let r = solve_double_bubble_radius(spec.volumes[0])?;
    let freq = spec.resolution.frequency(r)?;
    let mesh = double_bubble_mesh(r, freq);
    let mut parameters = BTreeMap::new();
    parameters.insert("lambda".into(), 2.0 / r);
    parameters.insert("interface_radius".into(), r * 3f64.sqrt() / 2.0);
    finish_cluster(
        spec,
        mesh,
        Construction {
            kind: spec.kind.as_str().into(),
            branch: "flat_interface".into(),
            radii: vec![r, r],
            frequency: freq,
            parameters,
        },
    )
}

/// Default contact direction: the middle-ring vertex of lobe 1 at azimuth 30°.
fn default_direction() -> Vec3 {
    let (s60, c60) = (PI / 3.0).sin_cos();
    let (s30, c30) = (PI / 6.0).sin_cos();
    Vec3::new(s60 * c30, s60 * s30, -c60)
}

/// Distance from `p` to the solid lobe `{|x - c| ≤ r, x·n ≥ 0}` whose
/// cutting plane passes through the origin.
fn distance_to_lobe(p: &Vec3, c: &Vec3, r: f64, n: &Vec3) -> f64 {
    let along = p.dot(n);
    let d_ball = ((p - c).norm() - r).max(0.0);
    if along >= 0.0 {
        return d_ball;
    }
    let rho = r * 3f64.sqrt() / 2.0;
    let w = p - n * along;
    let radial = (w.norm() - rho).max(0.0);
    let d_disk = (along * along + radial * radial).sqrt();
    let q = c + (p - c).normalize() * r;
    if q.dot(n) >= 0.0 {
        d_disk.min(d_ball)
    } else {
        d_disk
    }
}

pub fn build_ball_plus_double_bubble(spec: &ConfigurationSpec) -> Result<Cluster> {
    expect_kind(spec, ConfigurationKind::BallPlusDoubleBubble)?;
    check_equal_pair(&spec.volumes[..2])?;
    let r = solve_double_bubble_radius(spec.volumes[0])?;
    let big_r = ball_radius(spec.volumes[2])?;
    let placement = spec.placement();
    let dir = match placement.direction {
        Some(d) => Unit::try_new(Vec3::from(d), 1e-300)
            .ok_or_else(|| Error::InvalidSpec("placement direction must be non-zero".into()))?
            .into_inner(),
        None => default_direction(),
    };
    let c1 = Vec3::new(0.0, 0.0, -r / 2.0);
    let c2 = Vec3::new(0.0, 0.0, r / 2.0);
    let polar = dir.dot(&-Vec3::z()).clamp(-1.0, 1.0).acos().to_degrees();
    let tangent = placement.is_tangent();
    if tangent && polar >= 120.0 - 1e-9 {
        return Err(Error::TangencyOnInterface);
    }
    let gap = if tangent { 0.0 } else { placement.gap.unwrap_or(0.5 * r.min(big_r)) };
    if gap < 0.0 {
        return Err(Error::OverlapError(format!("negative gap {gap}")));
    }
    let center = c1 + dir * (r + gap + big_r);
    let slack = 1e-9 * r.max(big_r);
    let d1 = distance_to_lobe(&center, &c1, r, &-Vec3::z());
    let d2 = distance_to_lobe(&center, &c2, r, &Vec3::z());
    if d1 < big_r - slack || d2 < big_r - slack {
        return Err(Error::OverlapError(format!(
            "ball of radius {big_r} at {:?} overlaps the double bubble",
            center.as_slice()
        )));
    }

    let freq = spec.resolution.frequency(r.min(big_r))?;
    let mut mesh = double_bubble_mesh(r, freq);
    // an icosphere vertex faces the double bubble
    let (v0, _) = super::lattice::icosahedron();
    let rot = Rotation3::rotation_between(&v0[0], &-dir)
        .unwrap_or_else(|| Rotation3::from_axis_angle(&Vec3::z_axis(), PI));
    let ball = icosphere(center, big_r, freq, &rot, 3);
    mesh.append(&ball);

    let mut parameters = BTreeMap::new();
    parameters.insert("lambda".into(), 2.0 / r);
    parameters.insert("ball_lambda".into(), 2.0 / big_r);
    parameters.insert("gap".into(), gap);
    parameters.insert("contact_polar_deg".into(), polar);
    finish_cluster(
        spec,
        mesh,
        Construction {
            kind: spec.kind.as_str().into(),
            branch: if tangent { "tangent" } else { "separated" }.into(),
            radii: vec![r, r, big_r],
            frequency: freq,
            parameters,
        },
    )
}
