#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use bubble_core::catalogue::{build, icosphere, ConfigurationKind, ConfigurationSpec, Resolution, TaggedResolution};
use bubble_core::{LabeledMesh, Vec3};
use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn freq(n: usize) -> Resolution {
    Resolution::Tagged(TaggedResolution::Frequency(n))
}

pub fn relative(h: f64) -> Resolution {
    Resolution::Tagged(TaggedResolution::Relative(h))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Monte-Carlo estimate of each region's volume with its standard error.
///
/// Points are drawn uniformly in the bounding box; membership in region `i`
/// is the parity of crossings of an upward vertical ray with faces bounding
/// `i`. Faces are binned on an xy grid so each ray tests a few triangles.
pub fn mc_region_volumes(mesh: &LabeledMesh, k: usize, samples: usize, seed: u64) -> Vec<(f64, f64)> {
    let (lo, hi) = bounds(mesh);
    let bins = 128usize;
    let cell = |x: f64, a: f64, b: f64| (((x - a) / (b - a) * bins as f64) as usize).min(bins - 1);
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); bins * bins];
    for (f, tri) in mesh.faces.iter().enumerate() {
        let p = tri.map(|v| mesh.vertices[v as usize]);
        let (x0, x1) = (p.iter().map(|q| q.x).fold(f64::INFINITY, f64::min), p.iter().map(|q| q.x).fold(f64::NEG_INFINITY, f64::max));
        let (y0, y1) = (p.iter().map(|q| q.y).fold(f64::INFINITY, f64::min), p.iter().map(|q| q.y).fold(f64::NEG_INFINITY, f64::max));
        for i in cell(x0, lo.x, hi.x)..=cell(x1, lo.x, hi.x) {
            for j in cell(y0, lo.y, hi.y)..=cell(y1, lo.y, hi.y) {
                grid[i * bins + j].push(f);
            }
        }
    }
    let mut r = rng(seed);
    let mut hits = vec![0usize; k + 1];
    let mut crossings = vec![0u32; k + 1];
    for _ in 0..samples {
        let p = Vec3::new(r.random_range(lo.x..hi.x), r.random_range(lo.y..hi.y), r.random_range(lo.z..hi.z));
        crossings.iter_mut().for_each(|c| *c = 0);
        for &f in &grid[cell(p.x, lo.x, hi.x) * bins + cell(p.y, lo.y, hi.y)] {
            let [a, b, c] = mesh.faces[f].map(|v| mesh.vertices[v as usize]);
            if let Some(z) = vertical_hit(&a, &b, &c, p.x, p.y) {
                if z > p.z {
                    let l = mesh.labels[f];
                    crossings[l.lo as usize] += 1;
                    crossings[l.hi as usize] += 1;
                }
            }
        }
        for i in 1..=k {
            if crossings[i] % 2 == 1 {
                hits[i] += 1;
            }
        }
    }
    let box_volume = (hi - lo).iter().product::<f64>();
    (1..=k)
        .map(|i| {
            let p = hits[i] as f64 / samples as f64;
            (p * box_volume, box_volume * (p * (1.0 - p) / samples as f64).sqrt())
        })
        .collect()
}

fn bounds(mesh: &LabeledMesh) -> (Vec3, Vec3) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for v in &mesh.vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    let pad = 1e-6 * (hi - lo).norm();
    (lo - Vec3::repeat(pad), hi + Vec3::repeat(pad))
}

/// Height at which the vertical line through `(x, y)` meets triangle `abc`.
fn vertical_hit(a: &Vec3, b: &Vec3, c: &Vec3, x: f64, y: f64) -> Option<f64> {
    let d = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if d == 0.0 {
        return None;
    }
    let u = ((x - a.x) * (c.y - a.y) - (c.x - a.x) * (y - a.y)) / d;
    let v = ((b.x - a.x) * (y - a.y) - (x - a.x) * (b.y - a.y)) / d;
    (u >= 0.0 && v >= 0.0 && u + v <= 1.0).then(|| a.z + u * (b.z - a.z) + v * (c.z - a.z))
}

/// `(2/3) ∫ 1/H dA` and the enclosed volume of the spheroid with semi-axes
/// `(a, a, c)`, `H` the sum of principal curvatures, by composite Simpson in
/// the polar angle.
pub fn spheroid_hk(a: f64, c: f64) -> (f64, f64) {
    let n = 20_000;
    let f = |u: f64| {
        let (s, co) = u.sin_cos();
        let q = (a * a * co * co + c * c * s * s).sqrt();
        let k_meridian = a * c / q.powi(3);
        let k_parallel = c / (a * q);
        let d_area = 2.0 * PI * a * s * q;
        d_area / (k_meridian + k_parallel)
    };
    let h = PI / n as f64;
    let mut sum = f(0.0) + f(PI);
    for i in 1..n {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (2.0 / 3.0 * sum * h / 3.0, 4.0 / 3.0 * PI * a * a * c)
}

/// Area of a triangle.
pub fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Contribution of a face to the volume of `region`: the signed tetrahedron
/// spanned with the origin, positive for the lower label.
pub fn face_volume(mesh: &LabeledMesh, f: usize, region: u32) -> f64 {
    let l = mesh.labels[f];
    let sign = if l.lo == region {
        1.0
    } else if l.hi == region {
        -1.0
    } else {
        return 0.0;
    };
    let [a, b, c] = mesh.faces[f].map(|v| mesh.vertices[v as usize]);
    sign * a.dot(&b.cross(&c)) / 6.0
}

/// Central differences of a sum of per-face terms in every vertex
/// coordinate; only faces incident to the moved vertex are re-evaluated.
pub fn finite_difference(mesh: &LabeledMesh, h: f64, term: impl Fn(&LabeledMesh, usize) -> f64) -> Vec<Vec3> {
    let mut incident = vec![Vec::new(); mesh.num_vertices()];
    for (f, tri) in mesh.faces.iter().enumerate() {
        for &v in tri {
            incident[v as usize].push(f);
        }
    }
    let mut m = mesh.clone();
    let mut out = vec![Vec3::zeros(); mesh.num_vertices()];
    for v in 0..mesh.num_vertices() {
        for d in 0..3 {
            let x = m.vertices[v][d];
            m.vertices[v][d] = x + h;
            let fp: f64 = incident[v].iter().map(|&f| term(&m, f)).sum();
            m.vertices[v][d] = x - h;
            let fm: f64 = incident[v].iter().map(|&f| term(&m, f)).sum();
            m.vertices[v][d] = x;
            out[v][d] = (fp - fm) / (2.0 * h);
        }
    }
    out
}

pub fn area_term(mesh: &LabeledMesh, f: usize) -> f64 {
    let [a, b, c] = mesh.faces[f].map(|v| mesh.vertices[v as usize]);
    triangle_area(&a, &b, &c)
}

/// Largest component error relative to the largest component.
pub fn max_rel_error(a: &[Vec3], b: &[Vec3]) -> f64 {
    let scale = a.iter().map(|v| v.amax()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max) / scale
}

/// A random closed mesh with at most 200 vertices: either a radially
/// perturbed, randomly rotated icosphere or a jittered double bubble.
pub fn random_mesh(seed: u64) -> LabeledMesh {
    let mut r = rng(seed);
    let mut mesh = if r.random_bool(0.7) {
        let f = r.random_range(1..=4usize);
        let rot = Rotation3::from_euler_angles(r.random_range(0.0..PI), r.random_range(0.0..PI), r.random_range(0.0..PI));
        let c = Vec3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let mut m = icosphere(c, r.random_range(0.5..2.0), f, &rot, 1);
        for v in m.vertices.iter_mut() {
            let d = *v - c;
            *v = c + d * r.random_range(0.85..1.15);
        }
        m
    } else {
        let spec = ConfigurationSpec::new(ConfigurationKind::StandardDoubleBubble, vec![1.0, 1.0], freq(3));
        build(&spec).expect("double bubble").mesh
    };
    let h = 0.02 * mesh.mean_edge_length();
    for v in mesh.vertices.iter_mut() {
        *v += Vec3::new(r.random_range(-h..h), r.random_range(-h..h), r.random_range(-h..h));
    }
    assert!(mesh.num_vertices() <= 200);
    mesh
}

/// Y-cone defect by enumerating all eight sign patterns.
pub fn y_cone_brute_force(n: [Vec3; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for mask in 0..8u32 {
        let s = |i: u32| if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
        best = best.min((s(0) * n[0] + s(1) * n[1] + s(2) * n[2]).norm());
    }
    best
}

/// Uniform random unit vector.
pub fn unit(r: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}
