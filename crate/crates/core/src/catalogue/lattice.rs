//! Structured meshing of curved patches.
//!
//! Each patch is described by a coarse macro triangulation whose vertices lie
//! on the target surface. Every macro triangle is subdivided with a
//! frequency-`n` barycentric lattice. Points on macro edges are computed once
//! per edge, so patches that share a macro edge (junction curves) share the
//! refined vertices by index. Interior lattice points are transfinitely
//! blended from their three edge curves and projected onto the surface.

use std::collections::HashMap;
use std::sync::Arc;

use crate::geometry::{Label, LabeledMesh, Vec3};

/// Radius as a function of the axial coordinate, sampled with slopes.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusProfile {
    /// `(z, radius, dradius/dz)` sorted by `z`.
    pub samples: Vec<(f64, f64, f64)>,
}

impl RadiusProfile {
    /// Cubic Hermite interpolation, clamped to the sampled range.
    pub fn radius(&self, z: f64) -> f64 {
        let s = &self.samples;
        if z <= s[0].0 {
            return s[0].1;
        }
        if z >= s[s.len() - 1].0 {
            return s[s.len() - 1].1;
        }
        let i = s.partition_point(|p| p.0 <= z).clamp(1, s.len() - 1);
        let (z0, r0, d0) = s[i - 1];
        let (z1, r1, d1) = s[i];
        let h = z1 - z0;
        let t = (z - z0) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * r0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * r1
            + (t3 - t2) * h * d1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Surface {
    Sphere { center: Vec3, radius: f64 },
    Plane { point: Vec3, normal: Vec3 },
    Revolution { origin: Vec3, axis: Vec3, profile: Arc<RadiusProfile> },
}

impl Surface {
    pub fn project(&self, p: &Vec3) -> Vec3 {
        match self {
            Surface::Sphere { center, radius } => center + (p - center).normalize() * *radius,
            Surface::Plane { point, normal } => p - normal * normal.dot(&(p - point)),
            Surface::Revolution { origin, axis, profile } => {
                let d = p - origin;
                let z = d.dot(axis);
                let w = d - axis * z;
                origin + axis * z + w.normalize() * profile.radius(z)
            }
        }
    }

    /// Point at parameter `t` on the surface curve between `a` and `b`.
    fn interpolate(&self, a: &Vec3, b: &Vec3, t: f64) -> Vec3 {
        match self {
            Surface::Sphere { center, radius } => slerp(center, *radius, a, b, t),
            _ => self.project(&a.lerp(b, t)),
        }
    }
}

/// Curve assigned to a macro edge shared by several patches.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeCurve {
    Circle { center: Vec3, radius: f64 },
    Line,
}

/// Desired direction of face normals on a patch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Facing {
    TowardPoint(Vec3),
    Direction(Vec3),
}

fn slerp(center: &Vec3, radius: f64, a: &Vec3, b: &Vec3, t: f64) -> Vec3 {
    let u = (a - center).normalize();
    let v = (b - center).normalize();
    let theta = u.dot(&v).clamp(-1.0, 1.0).acos();
    if theta < 1e-15 {
        return *a;
    }
    let s = theta.sin();
    center + (u * ((1.0 - t) * theta).sin() / s + v * (t * theta).sin() / s) * radius
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Key {
    Vertex(u32),
    Edge(u32, u32, usize),
    Face(usize, usize, usize),
}

/// Incremental builder for a labeled mesh made of lattice-refined patches.
pub struct LatticeMesher {
    freq: usize,
    macro_vertices: Vec<Vec3>,
    curves: HashMap<(u32, u32), EdgeCurve>,
    keys: HashMap<Key, u32>,
    macro_faces: usize,
    mesh: LabeledMesh,
}

impl LatticeMesher {
    pub fn new(freq: usize) -> Self {
        LatticeMesher {
            freq,
            macro_vertices: Vec::new(),
            curves: HashMap::new(),
            keys: HashMap::new(),
            macro_faces: 0,
            mesh: LabeledMesh::default(),
        }
    }

    pub fn frequency(&self) -> usize {
        self.freq
    }

    pub fn add_vertex(&mut self, p: Vec3) -> u32 {
        self.macro_vertices.push(p);
        (self.macro_vertices.len() - 1) as u32
    }

    pub fn position(&self, id: u32) -> Vec3 {
        self.macro_vertices[id as usize]
    }

    /// Pins the refined points of macro edge `a`–`b` to `curve`.
    pub fn register_edge(&mut self, a: u32, b: u32, curve: EdgeCurve) {
        self.curves.insert((a.min(b), a.max(b)), curve);
    }

    /// Registers every consecutive edge of a closed or open polyline.
    pub fn register_chain(&mut self, ids: &[u32], closed: bool, curve: EdgeCurve) {
        for w in ids.windows(2) {
            self.register_edge(w[0], w[1], curve.clone());
        }
        if closed && ids.len() > 2 {
            self.register_edge(*ids.last().unwrap(), ids[0], curve);
        }
    }

    fn vertex_id(&mut self, key: Key, p: impl FnOnce() -> Vec3) -> u32 {
        if let Some(&v) = self.keys.get(&key) {
            return v;
        }
        let v = self.mesh.vertices.len() as u32;
        self.mesh.vertices.push(p());
        self.keys.insert(key, v);
        v
    }

    /// Point at parameter `t` along macro edge `a → b`.
    fn edge_point(&self, surface: &Surface, a: u32, b: u32, t: f64) -> Vec3 {
        let (pa, pb) = (self.position(a), self.position(b));
        match self.curves.get(&(a.min(b), a.max(b))) {
            Some(EdgeCurve::Circle { center, radius }) => slerp(center, *radius, &pa, &pb, t),
            Some(EdgeCurve::Line) => pa.lerp(&pb, t),
            None => surface.interpolate(&pa, &pb, t),
        }
    }

    /// Adds a patch: macro triangles on `surface`, labeled `label`, with
    /// normals reoriented toward `facing`.
    pub fn add_patch(&mut self, surface: &Surface, label: Label, facing: Facing, faces: &[[u32; 3]]) {
        for f in faces {
            let mut ids = *f;
            let [p0, p1, p2] = ids.map(|i| self.position(i));
            let chord_n = (p1 - p0).cross(&(p2 - p0));
            let centroid = surface.project(&((p0 + p1 + p2) / 3.0));
            let want = match facing {
                Facing::TowardPoint(x) => x - centroid,
                Facing::Direction(d) => d,
            };
            if chord_n.dot(&want) < 0.0 {
                ids.swap(1, 2);
            }
            self.refine(surface, label, ids);
        }
    }

    fn refine(&mut self, surface: &Surface, label: Label, ids: [u32; 3]) {
        let n = self.freq;
        let face_no = self.macro_faces;
        self.macro_faces += 1;
        let corners = ids.map(|i| self.position(i));
        let mut index = vec![vec![0u32; n + 1]; n + 1];
        for a in 0..=n {
            for b in 0..=n - a {
                let w = [n - a - b, a, b];
                index[a][b] = self.lattice_point(surface, &ids, &corners, w, face_no);
            }
        }
        for a in 0..n {
            for b in 0..n - a {
                self.mesh.faces.push([index[a][b], index[a + 1][b], index[a][b + 1]]);
                self.mesh.labels.push(label);
                if a + b + 2 <= n {
                    self.mesh
                        .faces
                        .push([index[a + 1][b], index[a + 1][b + 1], index[a][b + 1]]);
                    self.mesh.labels.push(label);
                }
            }
        }
    }

    fn lattice_point(&mut self, surface: &Surface, ids: &[u32; 3], corners: &[Vec3; 3], w: [usize; 3], face_no: usize) -> u32 {
        let n = self.freq;
        let nz: Vec<usize> = (0..3).filter(|&i| w[i] > 0).collect();
        match nz.len() {
            1 => {
                let id = ids[nz[0]];
                let p = self.position(id);
                self.vertex_id(Key::Vertex(id), || p)
            }
            2 => {
                let (j, k) = (nz[0], nz[1]);
                let (mut a, mut b, mut i) = (ids[j], ids[k], w[k]);
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                    i = n - i;
                }
                let p = self.edge_point(surface, a, b, i as f64 / n as f64);
                self.vertex_id(Key::Edge(a, b, i), || p)
            }
            _ => {
                let bary = w.map(|x| x as f64 / n as f64);
                let lin = corners[0] * bary[0] + corners[1] * bary[1] + corners[2] * bary[2];
                let mut disp = Vec3::zeros();
                for i in 0..3 {
                    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                    let s = bary[j] + bary[k];
                    if s > 0.0 {
                        let t = bary[k] / s;
                        let chord = corners[j].lerp(&corners[k], t);
                        disp += (1.0 - bary[i]) * (self.edge_point(surface, ids[j], ids[k], t) - chord);
                    }
                }
                let p = surface.project(&(lin + disp));
                self.vertex_id(Key::Face(face_no, w[1], w[2]), || p)
            }
        }
    }

    pub fn finish(self) -> LabeledMesh {
        self.mesh
    }
}

/// Regular icosahedron vertices on the unit sphere and its 20 faces.
pub fn icosahedron() -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let v = raw.iter().map(|&(x, y, z)| Vec3::new(x, y, z).normalize()).collect();
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_lattice_shares_edges_and_closes() {
        let mut m = LatticeMesher::new(4);
        let (v, f) = icosahedron();
        for p in v {
            m.add_vertex(p);
        }
        let s = Surface::Sphere {
            center: Vec3::zeros(),
            radius: 1.0,
        };
        m.add_patch(&s, Label::new(0, 1), Facing::TowardPoint(Vec3::zeros()), &f);
        let mesh = m.finish();
        assert_eq!(mesh.num_faces(), 20 * 16);
        assert_eq!(mesh.num_vertices(), 10 * 16 + 2);
        mesh.validate().unwrap();
        for p in &mesh.vertices {
            assert!((p.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn hermite_profile_reproduces_cubic() {
        let f = |z: f64| 1.0 + z - 0.5 * z * z + 0.1 * z * z * z;
        let df = |z: f64| 1.0 - z + 0.3 * z * z;
        let samples = (0..5).map(|i| i as f64 * 0.5).map(|z| (z, f(z), df(z))).collect();
        let p = RadiusProfile { samples };
        for z in [0.1, 0.7, 1.33, 1.9] {
            assert!((p.radius(z) - f(z)).abs() < 1e-14);
        }
    }
}
