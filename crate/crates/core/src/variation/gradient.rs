use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::geometry::{LabeledMesh, Vec3};
use crate::par::{map_collect, pairwise_sum, Exec};

/// Per-vertex 3-vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField(pub Vec<Vec3>);

impl GradientField {
    pub fn zeros(n: usize) -> Self {
        GradientField(vec![Vec3::zeros(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &GradientField) -> f64 {
        let parts: Vec<f64> = self.0.iter().zip(&other.0).map(|(a, b)| a.dot(b)).collect();
        pairwise_sum(&parts)
    }

    /// Inner product weighted per vertex by `w`.
    pub fn dot_weighted(&self, other: &GradientField, w: &[f64]) -> f64 {
        let parts: Vec<f64> = self
            .0
            .iter()
            .zip(&other.0)
            .zip(w)
            .map(|((a, b), w)| w * a.dot(b))
            .collect();
        pairwise_sum(&parts)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &GradientField) {
        for (s, x) in self.0.iter_mut().zip(&x.0) {
            *s += a * x;
        }
    }

    /// Sum of all vectors.
    pub fn total(&self) -> Vec3 {
        let xs: Vec<f64> = self.0.iter().map(|v| v.x).collect();
        let ys: Vec<f64> = self.0.iter().map(|v| v.y).collect();
        let zs: Vec<f64> = self.0.iter().map(|v| v.z).collect();
        Vec3::new(pairwise_sum(&xs), pairwise_sum(&ys), pairwise_sum(&zs))
    }
}

impl Index<usize> for GradientField {
    type Output = Vec3;
    fn index(&self, i: usize) -> &Vec3 {
        &self.0[i]
    }
}

impl IndexMut<usize> for GradientField {
    fn index_mut(&mut self, i: usize) -> &mut Vec3 {
        &mut self.0[i]
    }
}

fn scatter(n: usize, faces: &[[u32; 3]], parts: &[[Vec3; 3]]) -> GradientField {
    let mut g = GradientField::zeros(n);
    for (f, p) in faces.iter().zip(parts) {
        for i in 0..3 {
            g[f[i] as usize] += p[i];
        }
    }
    g
}

/// Gradient of the area of triangle `(a, b, c)` with respect to each corner.
pub fn triangle_area_gradient(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<[Vec3; 3]> {
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    if !(len > 0.0) {
        return None;
    }
    let u = n / len;
    Some([
        0.5 * u.cross(&(c - b)),
        0.5 * u.cross(&(a - c)),
        0.5 * u.cross(&(b - a)),
    ])
}

/// Exact derivative of total area with respect to every vertex position.
pub fn area_gradient(mesh: &LabeledMesh) -> Result<GradientField> {
    area_gradient_with(mesh, Exec::default())
}

pub fn area_gradient_with(mesh: &LabeledMesh, exec: Exec) -> Result<GradientField> {
    let all: Vec<usize> = (0..mesh.num_faces()).collect();
    area_gradient_faces(mesh, &all, exec)
}

/// Area gradient restricted to the listed faces.
pub fn area_gradient_faces(mesh: &LabeledMesh, faces: &[usize], exec: Exec) -> Result<GradientField> {
    let parts = map_collect(exec, faces.len(), |i| {
        let [a, b, c] = mesh.corners(faces[i]);
        triangle_area_gradient(&a, &b, &c).ok_or(faces[i])
    });
    let mut ok = Vec::with_capacity(parts.len());
    for p in parts {
        ok.push(p.map_err(|face| Error::DegenerateTriangle { face })?);
    }
    let tri: Vec<[u32; 3]> = faces.iter().map(|&f| mesh.faces[f]).collect();
    Ok(scatter(mesh.num_vertices(), &tri, &ok))
}

/// Exact derivative of `compute_volume(mesh, region)`.
pub fn volume_gradient(mesh: &LabeledMesh, region: u32) -> Result<GradientField> {
    mesh.check_region_closed(region)?;
    let faces = mesh.region_faces(region);
    let parts: Vec<[Vec3; 3]> = faces
        .iter()
        .map(|&f| {
            let s = mesh.labels[f].sign(region) / 6.0;
            let [a, b, c] = mesh.corners(f);
            [s * b.cross(&c), s * c.cross(&a), s * a.cross(&b)]
        })
        .collect();
    let tri: Vec<[u32; 3]> = faces.iter().map(|&f| mesh.faces[f]).collect();
    Ok(scatter(mesh.num_vertices(), &tri, &parts))
}

/// Volume gradients of regions `1..=k` in one pass, without closedness checks.
///
/// Uses the translation-invariant per-face form `(q - p) × (s - p) / 6`,
/// which agrees with the exact gradient on closed regions.
pub fn volume_gradients(mesh: &LabeledMesh, k: usize, exec: Exec) -> Vec<GradientField> {
    let parts = map_collect(exec, mesh.num_faces(), |f| local_volume_gradient(mesh, f));
    let mut out = vec![GradientField::zeros(mesh.num_vertices()); k];
    for (f, p) in parts.iter().enumerate() {
        let l = mesh.labels[f];
        for (region, s) in [(l.lo, 1.0), (l.hi, -1.0)] {
            if region >= 1 && region as usize <= k {
                let g = &mut out[region as usize - 1];
                for i in 0..3 {
                    g[mesh.faces[f][i] as usize] += s * p[i];
                }
            }
        }
    }
    out
}

/// Per-corner local volume gradient of face `f` in its own orientation.
pub fn local_volume_gradient(mesh: &LabeledMesh, f: usize) -> [Vec3; 3] {
    let n = mesh.face_cross(f) / 6.0;
    [n, n, n]
}
