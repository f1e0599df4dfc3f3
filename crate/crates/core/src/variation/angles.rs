use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{edge_key, Cluster, EdgeTopology, JunctionCurve, Label, LabeledMesh, Vec3};
use crate::variation::fit::fit_gradients;
use crate::variation::gradient::{area_gradient, triangle_area_gradient, volume_gradients};

/// Dihedral statistics for one pair of sheets along a junction curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct PairAngles {
    pub a: String,
    pub b: String,
    pub median_deg: f64,
    pub min_deg: f64,
    pub max_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct JunctionStats {
    pub labels: Vec<String>,
    pub closed: bool,
    pub edges: usize,
    pub pairs: Vec<PairAngles>,
}

/// Junction dihedral angles after fitting the cluster's multipliers.
pub fn junction_angles(cluster: &Cluster, curve: &JunctionCurve) -> Result<JunctionStats> {
    let ga = area_gradient(&cluster.mesh)?;
    let gvs = volume_gradients(&cluster.mesh, cluster.k, Default::default());
    let fit = fit_gradients(&ga, &gvs);
    Ok(junction_angles_with(&cluster.mesh, curve, &fit.lambdas))
}

/// Junction dihedral angles given region multipliers `lambdas` (region 1 first).
///
/// At each interior curve vertex the sheet conormal is the direction of the
/// sheet's surface-tension pull: minus the sheet's area gradient at the
/// vertex after removing its pressure term `(λ_lo − λ_hi) g`, projected
/// orthogonally to the curve tangent. Edge conormals average their two
/// endpoints; edges whose endpoints are both curve ends use the chord to the
/// opposite face vertex.
pub fn junction_angles_with(mesh: &LabeledMesh, curve: &JunctionCurve, lambdas: &[f64]) -> JunctionStats {
    let topo = mesh.edge_topology();
    let mut star = vec![Vec::new(); mesh.num_vertices()];
    let on_curve: std::collections::HashSet<u32> = curve.vertices.iter().copied().collect();
    for (f, tri) in mesh.faces.iter().enumerate() {
        for v in tri {
            if on_curve.contains(v) {
                star[*v as usize].push(f);
            }
        }
    }
    let ctx = Ctx {
        mesh,
        topo: &topo,
        star,
        lambdas,
    };
    let labels = curve.labels;
    let nv = curve.vertices.len();
    let ends = curve.endpoints();
    let chain_len = if curve.closed { nv - 1 } else { nv };

    let vertex_conormals: Vec<Option<[Vec3; 3]>> = (0..chain_len)
        .map(|i| {
            let v = curve.vertices[i];
            if ends.contains(&v) {
                return None;
            }
            let prev = if i == 0 { curve.vertices[nv - 2] } else { curve.vertices[i - 1] };
            let next = curve.vertices[i + 1];
            let t = (mesh.vertices[next as usize] - mesh.vertices[prev as usize]).normalize();
            ctx.vertex_conormals(v, &labels, &t)
        })
        .collect();

    let mut samples: [Vec<f64>; 3] = Default::default();
    for i in 0..nv - 1 {
        let (a, b) = (curve.vertices[i], curve.vertices[i + 1]);
        let ca = vertex_conormals[i];
        let cb = vertex_conormals[(i + 1) % chain_len];
        let con = match (ca, cb) {
            (Some(x), Some(y)) => Some(std::array::from_fn(|j| (x[j] + y[j]).normalize())),
            (Some(x), None) | (None, Some(x)) => Some(x),
            (None, None) => ctx.chord_conormals(a, b, &labels),
        };
        if let Some(c) = con {
            for (p, (x, y)) in PAIRS.iter().enumerate() {
                samples[p].push(c[*x].dot(&c[*y]).clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
    }
    let pairs = PAIRS
        .iter()
        .zip(samples.iter_mut())
        .map(|((x, y), s)| {
            s.sort_by(f64::total_cmp);
            PairAngles {
                a: labels[*x].to_string(),
                b: labels[*y].to_string(),
                median_deg: median(s),
                min_deg: s.first().copied().unwrap_or(f64::NAN),
                max_deg: s.last().copied().unwrap_or(f64::NAN),
            }
        })
        .collect();
    JunctionStats {
        labels: labels.iter().map(Label::to_string).collect(),
        closed: curve.closed,
        edges: curve.num_edges(),
        pairs,
    }
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

struct Ctx<'a> {
    mesh: &'a LabeledMesh,
    topo: &'a EdgeTopology,
    star: Vec<Vec<usize>>,
    lambdas: &'a [f64],
}

impl Ctx<'_> {
    fn lambda(&self, region: u32) -> f64 {
        if region == 0 {
            0.0
        } else {
            self.lambdas.get(region as usize - 1).copied().unwrap_or(0.0)
        }
    }

    fn vertex_conormals(&self, v: u32, labels: &[Label; 3], t: &Vec3) -> Option<[Vec3; 3]> {
        let star = &self.star[v as usize];
        let mut out = [Vec3::zeros(); 3];
        for (j, l) in labels.iter().enumerate() {
            let mut force = Vec3::zeros();
            let mut g = Vec3::zeros();
            for &f in star.iter().filter(|&&f| self.mesh.labels[f] == *l) {
                let tri = self.mesh.faces[f];
                let [p, q, r] = self.mesh.corners(f);
                let k = tri.iter().position(|&x| x == v)?;
                force += triangle_area_gradient(&p, &q, &r)?[k];
                g += self.mesh.face_cross(f) / 6.0;
            }
            force -= (self.lambda(l.lo) - self.lambda(l.hi)) * g;
            let c = -(force - force.dot(t) * t);
            out[j] = c.try_normalize(0.0)?;
        }
        Some(out)
    }

    fn chord_conormals(&self, a: u32, b: u32, labels: &[Label; 3]) -> Option<[Vec3; 3]> {
        let pa = self.mesh.vertices[a as usize];
        let t = (self.mesh.vertices[b as usize] - pa).normalize();
        let fs = self.topo.edges.get(&edge_key(a, b))?;
        let mut out = [Vec3::zeros(); 3];
        for (j, l) in labels.iter().enumerate() {
            let f = *fs.iter().find(|&&f| self.mesh.labels[f as usize] == *l)? as usize;
            let w = *self.mesh.faces[f].iter().find(|&&x| x != a && x != b)?;
            let d = self.mesh.vertices[w as usize] - pa;
            out[j] = (d - d.dot(&t) * t).try_normalize(0.0)?;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::extract_junction_curves;

    /// Three flat fans along the x axis at the given azimuths (degrees).
    pub(crate) fn t_junction(az: [f64; 3], n: usize) -> LabeledMesh {
        let mut v: Vec<Vec3> = (0..=n).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let mut faces = Vec::new();
        let mut labels = Vec::new();
        for (k, l) in [Label::new(0, 1), Label::new(0, 2), Label::new(1, 2)].iter().enumerate() {
            let a = az[k].to_radians();
            let base = v.len() as u32;
            for i in 0..=n {
                v.push(Vec3::new(i as f64, a.cos(), a.sin()));
            }
            for i in 0..n as u32 {
                faces.push([i, i + 1, base + i]);
                labels.push(*l);
                faces.push([i + 1, base + i + 1, base + i]);
                labels.push(*l);
            }
        }
        LabeledMesh::new(v, faces, labels)
    }

    #[test]
    fn synthetic_t_junction() {
        let m = t_junction([0.0, 90.0, 225.0], 6);
        let c = &extract_junction_curves(&m).unwrap()[0];
        let s = junction_angles_with(&m, c, &[0.0, 0.0]);
        let mut med: Vec<f64> = s.pairs.iter().map(|p| p.median_deg).collect();
        med.sort_by(f64::total_cmp);
        assert!((med[0] - 90.0).abs() < 0.5);
        assert!((med[1] - 135.0).abs() < 0.5);
        assert!((med[2] - 135.0).abs() < 0.5);
    }
}
