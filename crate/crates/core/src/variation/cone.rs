use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{LabeledMesh, Vec3};
use crate::par::{map_collect, Exec};

/// Defect of the Y-cone balance `v + v₁ + v₂ = 0`.
///
/// The minimum of `|±v ± v₁ ± v₂|` is taken over all sign choices (the four
/// classes up to a global sign); the cone is stationary iff the defect is at
/// most `1e-9`.
pub fn y_cone_stationarity(normals: [Vec3; 3]) -> (bool, f64) {
    let [a, b, c] = normals;
    let defect = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .iter()
        .map(|(s1, s2)| (a + *s1 * b + *s2 * c).norm())
        .fold(f64::INFINITY, f64::min);
    (defect <= 1e-9, defect)
}

/// Largest distance by which a vertex of `region` lies outside the supporting
/// plane of one of its faces. Zero for a discretely convex region.
pub fn convexity_defect(mesh: &LabeledMesh, region: u32) -> f64 {
    let faces = mesh.outward_faces(region);
    let verts = mesh.region_vertices(region);
    let pts: Vec<Vec3> = verts.iter().map(|&v| mesh.vertices[v as usize]).collect();
    let per_face = map_collect(Exec::default(), faces.len(), |i| {
        let f = faces[i];
        let a = mesh.vertices[f[0] as usize];
        let n = (mesh.vertices[f[1] as usize] - a).cross(&(mesh.vertices[f[2] as usize] - a));
        let Some(n) = n.try_normalize(0.0) else {
            return 0.0;
        };
        pts.iter().map(|p| n.dot(&(p - a))).fold(0.0, f64::max)
    });
    per_face.into_iter().fold(0.0, f64::max)
}

/// Fails with `NonConvexInput` when the convexity defect exceeds `rel_tol × diameter`.
pub fn check_convex(mesh: &LabeledMesh, region: u32, rel_tol: f64) -> Result<f64> {
    let defect = convexity_defect(mesh, region);
    let scale = region_diameter(mesh, region);
    if defect > rel_tol * scale {
        return Err(Error::NonConvexInput { region, defect });
    }
    Ok(defect)
}

pub(crate) fn region_diameter(mesh: &LabeledMesh, region: u32) -> f64 {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for v in mesh.region_vertices(region) {
        lo = lo.inf(&mesh.vertices[v as usize]);
        hi = hi.sup(&mesh.vertices[v as usize]);
    }
    (hi - lo).norm()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ConeKind {
    /// Half-space: the boundary is C¹ at the vertex.
    Flat,
    /// Dihedral wedge with the given opening, degrees.
    Wedge { opening_deg: f64 },
    /// Anything sharper, e.g. a polyhedral corner.
    Corner,
}

/// Polyhedral tangent cone of a convex region at a vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TangentCone {
    /// Unit directions of the incident edges.
    pub generators: Vec<Vec3>,
    /// Outward unit normals of the incident faces.
    pub face_normals: Vec<Vec3>,
    /// Largest angle between an incident face normal and the mean normal, degrees.
    pub max_deviation_deg: f64,
    pub kind: ConeKind,
}

impl TangentCone {
    pub fn is_flat(&self) -> bool {
        self.kind == ConeKind::Flat
    }
}

/// Tangent cone of `region` at `vertex`, classified with angular tolerance `tol_deg`.
pub fn tangent_cone_at(mesh: &LabeledMesh, region: u32, vertex: u32, tol_deg: f64) -> Result<TangentCone> {
    check_convex(mesh, region, 1e-6)?;
    let mut generators = Vec::new();
    let mut face_normals = Vec::new();
    let mut weighted = Vec3::zeros();
    for f in mesh.outward_faces(region) {
        let Some(k) = f.iter().position(|&x| x == vertex) else {
            continue;
        };
        let p = mesh.vertices[vertex as usize];
        for j in [1, 2] {
            let d = (mesh.vertices[f[(k + j) % 3] as usize] - p).normalize();
            if !generators.iter().any(|g: &Vec3| (g - d).norm() < 1e-12) {
                generators.push(d);
            }
        }
        let n = (mesh.vertices[f[1] as usize] - mesh.vertices[f[0] as usize])
            .cross(&(mesh.vertices[f[2] as usize] - mesh.vertices[f[0] as usize]));
        weighted += n;
        face_normals.push(n.normalize());
    }
    if face_normals.is_empty() {
        return Err(Error::InvalidMesh(format!("vertex {vertex} is not on region {region}")));
    }
    let mean = weighted.normalize();
    let angle = |a: &Vec3, b: &Vec3| a.dot(b).clamp(-1.0, 1.0).acos().to_degrees();
    let max_deviation_deg = face_normals.iter().map(|n| angle(n, &mean)).fold(0.0, f64::max);

    // Two most separated normals span the candidate wedge.
    let mut best = (0, 0, 0.0);
    for i in 0..face_normals.len() {
        for j in i + 1..face_normals.len() {
            let a = angle(&face_normals[i], &face_normals[j]);
            if a > best.2 {
                best = (i, j, a);
            }
        }
    }
    let kind = if best.2 <= tol_deg {
        ConeKind::Flat
    } else {
        let (na, nb) = (face_normals[best.0], face_normals[best.1]);
        let wedge = face_normals
            .iter()
            .all(|n| angle(n, &na) <= tol_deg || angle(n, &nb) <= tol_deg);
        if wedge {
            ConeKind::Wedge {
                opening_deg: 180.0 - best.2,
            }
        } else {
            ConeKind::Corner
        }
    };
    Ok(TangentCone {
        generators,
        face_normals,
        max_deviation_deg,
        kind,
    })
}
