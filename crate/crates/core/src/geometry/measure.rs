use crate::error::Result;
use crate::geometry::{Label, LabeledMesh, Vec3};
use crate::par::{map_collect, pairwise_sum, Exec};

/// Enclosed volume of `region` by the divergence theorem.
///
/// Fails with `OpenSurface` or `OrientationError` if the region boundary is
/// not a closed oriented surface.
pub fn compute_volume(mesh: &LabeledMesh, region: u32) -> Result<f64> {
    mesh.check_region_closed(region)?;
    Ok(region_volume_unchecked(mesh, region, Exec::default()))
}

/// Signed volume of `region` without the closedness check.
pub fn region_volume_unchecked(mesh: &LabeledMesh, region: u32, exec: Exec) -> f64 {
    let faces = mesh.region_faces(region);
    let parts = map_collect(exec, faces.len(), |i| {
        let f = faces[i];
        let [a, b, c] = mesh.corners(f);
        mesh.labels[f].sign(region) * a.dot(&b.cross(&c)) / 6.0
    });
    pairwise_sum(&parts)
}

/// Volumes of regions `1..=k`, unchecked.
pub fn all_volumes(mesh: &LabeledMesh, k: usize, exec: Exec) -> Vec<f64> {
    let parts = map_collect(exec, mesh.num_faces(), |f| {
        let [a, b, c] = mesh.corners(f);
        a.dot(&b.cross(&c)) / 6.0
    });
    let mut per: Vec<Vec<f64>> = vec![Vec::new(); k + 1];
    for (f, v) in parts.iter().enumerate() {
        let l = mesh.labels[f];
        if (l.lo as usize) <= k {
            per[l.lo as usize].push(*v);
        }
        if (l.hi as usize) <= k {
            per[l.hi as usize].push(-*v);
        }
    }
    per[1..].iter().map(|p| pairwise_sum(p)).collect()
}

/// Total area of faces labeled `pair`; 0 when there are none.
pub fn compute_interface_area(mesh: &LabeledMesh, pair: Label) -> f64 {
    let faces = mesh.label_faces(pair);
    let parts: Vec<f64> = faces.iter().map(|&f| mesh.face_area(f)).collect();
    pairwise_sum(&parts)
}

pub fn total_area(mesh: &LabeledMesh, exec: Exec) -> f64 {
    let parts = map_collect(exec, mesh.num_faces(), |f| mesh.face_area(f));
    pairwise_sum(&parts)
}

/// Generalized winding number of the boundary of `region` around `p`:
/// close to 1 inside, 0 outside.
pub fn winding_number(mesh: &LabeledMesh, region: u32, p: &Vec3) -> f64 {
    let mut parts = Vec::new();
    for f in mesh.outward_faces(region) {
        let a = mesh.vertices[f[0] as usize] - p;
        let b = mesh.vertices[f[1] as usize] - p;
        let c = mesh.vertices[f[2] as usize] - p;
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let num = a.dot(&b.cross(&c));
        let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
        parts.push(2.0 * num.atan2(den));
    }
    pairwise_sum(&parts) / (4.0 * std::f64::consts::PI)
}
