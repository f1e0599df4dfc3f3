//! Label-preserving local remeshing: Delaunay edge flips and long-edge splits
//! inside a single interface. Junction edges are never touched.

use std::collections::HashSet;

use crate::geometry::{edge_key, EdgeKey, Label, LabeledMesh, Vec3};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RemeshStats {
    pub flips: usize,
    pub splits: usize,
}

/// Largest dihedral deviation from flat, degrees, allowed for a flip.
const FLIP_MAX_BEND_DEG: f64 = 20.0;

/// Edges inside one interface (two faces, same label) with their faces, sorted.
fn interior_edges(mesh: &LabeledMesh) -> Vec<(EdgeKey, [u32; 2])> {
    let topo = mesh.edge_topology();
    let mut out: Vec<(EdgeKey, [u32; 2])> = topo
        .edges
        .iter()
        .filter(|(_, fs)| fs.len() == 2 && mesh.labels[fs[0] as usize] == mesh.labels[fs[1] as usize])
        .map(|(&e, fs)| (e, [fs[0], fs[1]]))
        .collect();
    out.sort_unstable();
    out
}

/// Vertex opposite the directed edge `a → b`, if `face` contains it.
fn opposite(face: &[u32; 3], a: u32, b: u32) -> Option<u32> {
    (0..3).find_map(|i| (face[i] == a && face[(i + 1) % 3] == b).then_some(face[(i + 2) % 3]))
}

fn angle_at(p: &Vec3, q: &Vec3, r: &Vec3) -> f64 {
    (q - p).angle(&(r - p))
}

/// One pass of Delaunay flips over interior interface edges.
pub fn flip_edges(mesh: &mut LabeledMesh) -> usize {
    flip_pass(mesh, |_, [pa, pb, pc, pd]| {
        angle_at(pc, pa, pb) + angle_at(pd, pa, pb) > std::f64::consts::PI + 1e-9
    })
}

/// Flips edges of exterior-facing interfaces where the bounded region has a
/// reflex dihedral, repeating until none remain. For vertices on a sphere
/// this yields the convex hull triangulation.
pub fn flip_reflex_edges(mesh: &mut LabeledMesh) -> usize {
    let mut total = 0;
    for _ in 0..1000 {
        let n = flip_pass(mesh, |label, [pa, pb, pc, pd]| {
            if label.lo != 0 {
                return false;
            }
            // face normals point from the exterior into the region
            let n = (pb - pa).cross(&(pc - pa));
            let scale = (pb - pa).norm().max((pc - pa).norm());
            n.dot(&(pd - pa)) < -1e-12 * scale * n.norm()
        });
        total += n;
        if n == 0 {
            break;
        }
    }
    total
}

fn flip_pass(mesh: &mut LabeledMesh, should_flip: impl Fn(Label, [&Vec3; 4]) -> bool) -> usize {
    let edges = interior_edges(mesh);
    let mut existing: HashSet<EdgeKey> = mesh
        .faces
        .iter()
        .flat_map(|f| (0..3).map(move |i| edge_key(f[i], f[(i + 1) % 3])))
        .collect();
    let mut touched = vec![false; mesh.num_faces()];
    let mut flips = 0;
    let bend_cos = FLIP_MAX_BEND_DEG.to_radians().cos();
    for ((a, b), [f1, f2]) in edges {
        let (f1, f2) = (f1 as usize, f2 as usize);
        if touched[f1] || touched[f2] {
            continue;
        }
        let (fa, fb) = (mesh.faces[f1], mesh.faces[f2]);
        let (f1, f2, c, d) = match (opposite(&fa, a, b), opposite(&fb, b, a)) {
            (Some(c), Some(d)) => (f1, f2, c, d),
            _ => match (opposite(&fb, a, b), opposite(&fa, b, a)) {
                (Some(c), Some(d)) => (f2, f1, c, d),
                _ => continue,
            },
        };
        if c == d || existing.contains(&edge_key(c, d)) {
            continue;
        }
        let [pa, pb, pc, pd] = [a, b, c, d].map(|v| mesh.vertices[v as usize]);
        let (n1, n2) = ((pb - pa).cross(&(pc - pa)), (pa - pb).cross(&(pd - pb)));
        if n1.normalize().dot(&n2.normalize()) < bend_cos {
            continue;
        }
        if !should_flip(mesh.labels[f1], [&pa, &pb, &pc, &pd]) {
            continue;
        }
        let (m1, m2) = ((pa - pc).cross(&(pd - pc)), (pd - pc).cross(&(pb - pc)));
        let avg = n1 + n2;
        if m1.dot(&avg) <= 0.0 || m2.dot(&avg) <= 0.0 {
            continue;
        }
        mesh.faces[f1] = [c, a, d];
        mesh.faces[f2] = [c, d, b];
        existing.remove(&edge_key(a, b));
        existing.insert(edge_key(c, d));
        touched[f1] = true;
        touched[f2] = true;
        flips += 1;
    }
    flips
}

/// Splits interior interface edges longer than `max_len` at their midpoints.
pub fn split_long_edges(mesh: &mut LabeledMesh, max_len: f64) -> usize {
    let edges = interior_edges(mesh);
    let mut touched = vec![false; mesh.num_faces()];
    let mut splits = 0;
    for ((a, b), [f1, f2]) in edges {
        let (f1, f2) = (f1 as usize, f2 as usize);
        if touched[f1] || touched[f2] {
            continue;
        }
        let (pa, pb) = (mesh.vertices[a as usize], mesh.vertices[b as usize]);
        if (pb - pa).norm() <= max_len {
            continue;
        }
        let (f1, f2, c, d) = match (opposite(&mesh.faces[f1], a, b), opposite(&mesh.faces[f2], b, a)) {
            (Some(c), Some(d)) => (f1, f2, c, d),
            _ => match (opposite(&mesh.faces[f2], a, b), opposite(&mesh.faces[f1], b, a)) {
                (Some(c), Some(d)) => (f2, f1, c, d),
                _ => continue,
            },
        };
        let m = mesh.vertices.len() as u32;
        mesh.vertices.push(0.5 * (pa + pb));
        let label = mesh.labels[f1];
        mesh.faces[f1] = [a, m, c];
        mesh.faces[f2] = [b, m, d];
        mesh.faces.push([m, b, c]);
        mesh.faces.push([m, a, d]);
        mesh.labels.push(label);
        mesh.labels.push(label);
        touched[f1] = true;
        touched[f2] = true;
        touched.extend([true, true]);
        splits += 1;
    }
    splits
}

/// Splits edges longer than `max_len`, then flips to restore the Delaunay
/// property within each interface.
pub fn remesh(mesh: &mut LabeledMesh, max_len: f64) -> RemeshStats {
    let splits = split_long_edges(mesh, max_len);
    let flips = flip_edges(mesh);
    RemeshStats { flips, splits }
}
