//! Case analysis of stationary convex clusters with at most three regions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_interaction_graph, Cluster, InteractionGraph, Label, LabeledMesh, Vec3};
use crate::par::{map_collect, pairwise_sum, Exec};
use crate::variation::cone::region_diameter;
use crate::flow::remesh::flip_reflex_edges;
use crate::variation::{convexity_defect, fit_multipliers, VariationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Configuration {
    SingleBall,
    DisjointBalls,
    StandardDoubleBubble,
    BallPlusDoubleBubble,
    LinedUpTriple,
    StandardTriple,
    Unclassified,
}

impl Configuration {
    /// Configuration that the case analysis pairs with `case_label`.
    pub fn paired_with(case_label: &str) -> Option<Configuration> {
        Some(match case_label {
            "single" => Configuration::SingleBall,
            "double_disjoint" | "triple_case_1" => Configuration::DisjointBalls,
            "double_interacting" => Configuration::StandardDoubleBubble,
            "triple_case_2" => Configuration::BallPlusDoubleBubble,
            "triple_case_3" => Configuration::LinedUpTriple,
            "triple_case_4" => Configuration::StandardTriple,
            _ => return None,
        })
    }
}

/// Least-squares sphere or plane fitted to one interface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct PieceFit {
    pub kind: String,
    pub center: [f64; 3],
    /// Sphere radius; 0 for planes.
    pub radius: f64,
    /// Plane unit normal oriented from the lower to the higher label; zero for spheres.
    pub normal: [f64; 3],
    pub rms: f64,
    pub rms_rel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct Classification {
    pub k: usize,
    /// `single`, `double_disjoint`, `double_interacting` or `triple_case_<n>`.
    pub case_label: String,
    /// Case number 1–4 for three regions.
    pub case_number: Option<u8>,
    pub configuration: Configuration,
    /// Middle-cell variant for lined-up triples.
    pub branch: Option<String>,
    pub graph_edges: Vec<[u32; 2]>,
    pub lambdas: Vec<f64>,
    pub residual_rel: f64,
    pub fits: BTreeMap<String, PieceFit>,
    pub angle_pass: bool,
    pub worst_angle_deviation_deg: f64,
    /// Wedge openings about the common line, degrees (standard triple), or
    /// the plane opening angle (lined-up triple).
    pub wedge_angles_deg: Vec<f64>,
    /// Per non-interacting pair: surface distance within the tangency tolerance.
    pub tangency_flags: BTreeMap<String, bool>,
    /// Predicates that failed; empty unless `configuration` is `Unclassified`.
    pub failed: Vec<String>,
}

impl Classification {
    /// Whether the emitted configuration is the one paired with the case.
    pub fn pairing_holds(&self) -> bool {
        self.configuration == Configuration::Unclassified
            || Configuration::paired_with(&self.case_label) == Some(self.configuration)
    }
}

/// True iff the wedge angles sum to `2π` within `1e-9` and some angle is at
/// least `π/3`.
pub fn angle_sum_witness(angles: [f64; 3]) -> bool {
    let sum: f64 = angles.iter().sum();
    (sum - 2.0 * PI).abs() <= 1e-9 && angles.iter().any(|&a| a >= PI / 3.0)
}

fn sphere_fit(points: &[Vec3]) -> PieceFit {
    let n = points.len();
    let a = DMatrix::from_fn(n, 4, |i, j| if j < 3 { 2.0 * points[i][j] } else { 1.0 });
    let b = DVector::from_fn(n, |i, _| points[i].norm_squared());
    let sol = a.clone().svd(true, true).solve(&b, 1e-14).unwrap_or_else(|_| DVector::zeros(4));
    let c = Vec3::new(sol[0], sol[1], sol[2]);
    let r = (sol[3] + c.norm_squared()).max(0.0).sqrt();
    let sq: Vec<f64> = points.iter().map(|p| ((p - c).norm() - r).powi(2)).collect();
    let rms = (pairwise_sum(&sq) / n as f64).sqrt();
    PieceFit {
        kind: "sphere".into(),
        center: c.into(),
        radius: r,
        normal: [0.0; 3],
        rms,
        rms_rel: if r > 0.0 { rms / r } else { f64::INFINITY },
    }
}

fn plane_fit(points: &[Vec3], orient: &Vec3, scale: f64) -> PieceFit {
    let n = points.len() as f64;
    let c = points.iter().sum::<Vec3>() / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - c;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let i = eig.eigenvalues.imin();
    let mut normal: Vec3 = eig.eigenvectors.column(i).into();
    if normal.dot(orient) < 0.0 {
        normal = -normal;
    }
    let sq: Vec<f64> = points.iter().map(|p| normal.dot(&(p - c)).powi(2)).collect();
    let rms = (pairwise_sum(&sq) / n).sqrt();
    PieceFit {
        kind: "plane".into(),
        center: c.into(),
        radius: 0.0,
        normal: normal.into(),
        rms,
        rms_rel: rms / scale,
    }
}

fn label_points(mesh: &LabeledMesh, label: Label) -> Vec<Vec3> {
    let mut vs: Vec<u32> = mesh.label_faces(label).iter().flat_map(|&f| mesh.faces[f]).collect();
    vs.sort_unstable();
    vs.dedup();
    vs.iter().map(|&v| mesh.vertices[v as usize]).collect()
}

/// Smallest vertex-to-vertex distance between the boundaries of two regions.
fn region_distance(mesh: &LabeledMesh, a: u32, b: u32) -> f64 {
    let pa: Vec<Vec3> = mesh.region_vertices(a).iter().map(|&v| mesh.vertices[v as usize]).collect();
    let pb: Vec<Vec3> = mesh.region_vertices(b).iter().map(|&v| mesh.vertices[v as usize]).collect();
    map_collect(Exec::default(), pa.len(), |i| {
        pb.iter().map(|q| (pa[i] - q).norm()).fold(f64::INFINITY, f64::min)
    })
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

fn mean_normal(mesh: &LabeledMesh, label: Label) -> Vec3 {
    mesh.label_faces(label).iter().map(|&f| mesh.face_cross(f)).sum()
}

fn angle_deg(a: &Vec3, b: &Vec3) -> f64 {
    a.angle(b).to_degrees()
}

struct Ctx<'a> {
    cluster: &'a Cluster,
    graph: InteractionGraph,
    report: VariationReport,
    fits: BTreeMap<Label, PieceFit>,
    failed: Vec<String>,
}

impl Ctx<'_> {
    fn tol(&self) -> &crate::geometry::ToleranceProfile {
        &self.cluster.tolerance
    }

    fn require(&mut self, ok: bool, what: String) {
        if !ok {
            self.failed.push(what);
        }
    }

    fn sphere(&self, region: u32) -> Option<&PieceFit> {
        self.fits.get(&Label::new(0, region))
    }

    fn plane_normal(&self, a: u32, b: u32) -> Option<Vec3> {
        self.fits.get(&Label::new(a, b)).map(|f| {
            let n = Vec3::from(f.normal);
            if a < b {
                n
            } else {
                -n
            }
        })
    }

    /// Equal multipliers across an interface, and λ = 2/r on free pieces.
    fn check_lambdas(&mut self) {
        let lam = self.report.lambdas.clone();
        let tol = self.tol().lambda_rel;
        for [i, j] in self.graph.edges().iter().map(|&(i, j)| [i as u32, j as u32]) {
            let (li, lj) = (lam[i as usize - 1], lam[j as usize - 1]);
            self.require(
                (li - lj).abs() <= tol * li.abs().max(lj.abs()),
                format!("equal_lambda_{i}_{j}: {li:.6} vs {lj:.6}"),
            );
        }
        for region in 1..=self.cluster.k as u32 {
            if let Some(f) = self.sphere(region) {
                let expect = 2.0 / f.radius;
                let l = lam[region as usize - 1];
                let ok = (l - expect).abs() <= tol * expect;
                self.require(ok, format!("lambda_radius_{region}: {l:.6} vs 2/r = {expect:.6}"));
            }
        }
    }

    fn check_fits(&mut self) {
        let tol = self.tol().fit_rel;
        let bad: Vec<String> = self
            .fits
            .iter()
            .filter(|(_, f)| !(f.rms_rel <= tol))
            .map(|(l, f)| format!("{}_fit_{l}: rms_rel {:.3e}", f.kind, f.rms_rel))
            .collect();
        self.failed.extend(bad);
    }

    fn check_residual(&mut self) {
        let r = self.report.residual_rel;
        let tol = self.tol().residual_rel;
        self.require(r <= tol, format!("stationarity: residual_rel {r:.3e} > {tol:.3e}"));
    }

    fn pieces_of(&self, region: u32) -> usize {
        self.cluster.mesh.label_set().iter().filter(|l| l.contains(region)).count()
    }
}

/// Classifies a cluster of one to three convex regions.
pub fn classify(cluster: &Cluster) -> Result<Classification> {
    let k = cluster.k;
    if !(1..=3).contains(&k) {
        return Err(Error::UnsupportedK(k));
    }
    let mesh = &cluster.mesh;
    mesh.validate()?;
    let tol = cluster.tolerance.clone();
    let mut hull_mesh = mesh.clone();
    flip_reflex_edges(&mut hull_mesh);
    for region in 1..=k as u32 {
        let defect = convexity_defect(&hull_mesh, region);
        if defect > tol.convexity_rel * region_diameter(mesh, region) {
            return Err(Error::ConvexityViolation { region, defect });
        }
    }
    let total: f64 = (0..mesh.num_faces()).map(|f| mesh.face_area(f)).sum();
    let graph = build_interaction_graph(cluster, tol.interaction_rel * total);
    let report = fit_multipliers(cluster)?;

    let mut fits = BTreeMap::new();
    for label in mesh.label_set() {
        let pts = label_points(mesh, label);
        let fit = if label.lo == 0 {
            sphere_fit(&pts)
        } else {
            let scale = fits
                .get(&Label::new(0, label.lo))
                .map(|f: &PieceFit| f.radius)
                .unwrap_or_else(|| region_diameter(mesh, label.lo) / 2.0);
            plane_fit(&pts, &mean_normal(mesh, label), scale)
        };
        fits.insert(label, fit);
    }

    let edges = graph.edges();
    let mut cx = Ctx {
        cluster,
        graph,
        report,
        fits,
        failed: Vec::new(),
    };

    let worst = cx.report.worst_angle_deviation();
    let angle_pass = worst <= tol.angle_deg;
    let n_edges = edges.len();
    let (case_label, case_number) = match (k, n_edges) {
        (1, _) => ("single".to_string(), None),
        (2, 0) => ("double_disjoint".into(), None),
        (2, _) => ("double_interacting".into(), None),
        (3, 0) => ("triple_case_1".into(), Some(1)),
        (3, 1) => ("triple_case_2".into(), Some(2)),
        (3, 2) => ("triple_case_3".into(), Some(3)),
        _ => ("triple_case_4".into(), Some(4)),
    };

    let mut tangency_flags = BTreeMap::new();
    for i in 1..=k as u32 {
        for j in i + 1..=k as u32 {
            if cx.graph.has_edge(i as usize, j as usize) {
                continue;
            }
            let d = region_distance(mesh, i, j);
            let r = [i, j]
                .iter()
                .filter_map(|&x| cx.sphere(x).map(|f| f.radius))
                .fold(f64::INFINITY, f64::min);
            tangency_flags.insert(format!("{i}_{j}"), d <= tol.tangency_rel * r);
        }
    }

    cx.check_fits();
    cx.check_residual();
    cx.check_lambdas();
    if n_edges > 0 {
        cx.require(angle_pass, format!("junction_angles: worst deviation {worst:.3}°"));
    }
    for region in 1..=k as u32 {
        let isolated = !edges.iter().any(|&(a, b)| a == region as usize || b == region as usize);
        if isolated {
            cx.require(cx.pieces_of(region) == 1, format!("ball_{region}: boundary has several pieces"));
        }
    }

    let mut branch = None;
    let mut wedges = Vec::new();
    let configuration = match case_label.as_str() {
        "single" => Configuration::SingleBall,
        "double_disjoint" | "triple_case_1" => Configuration::DisjointBalls,
        "double_interacting" | "triple_case_2" => {
            let &(a, b) = edges.first().expect("one edge");
            check_double(&mut cx, a as u32, b as u32);
            if k == 2 {
                Configuration::StandardDoubleBubble
            } else {
                Configuration::BallPlusDoubleBubble
            }
        }
        "triple_case_3" => {
            let m = (1..=3).find(|&i| cx.graph.degree(i) == 2).expect("path middle") as u32;
            let outer: Vec<u32> = (1..=3u32).filter(|&i| i != m).collect();
            let (b, opening) = check_lined_up(&mut cx, m, outer[0], outer[1]);
            branch = Some(b);
            wedges.push(opening);
            Configuration::LinedUpTriple
        }
        _ => {
            wedges = check_standard_triple(&mut cx);
            Configuration::StandardTriple
        }
    };
    let configuration = if cx.failed.is_empty() {
        configuration
    } else {
        Configuration::Unclassified
    };

    Ok(Classification {
        k,
        case_label,
        case_number,
        configuration,
        branch,
        graph_edges: edges.iter().map(|&(a, b)| [a as u32, b as u32]).collect(),
        lambdas: cx.report.lambdas.clone(),
        residual_rel: cx.report.residual_rel,
        fits: cx.fits.iter().map(|(l, f)| (l.to_string(), f.clone())).collect(),
        angle_pass,
        worst_angle_deviation_deg: worst,
        wedge_angles_deg: wedges,
        tangency_flags,
        failed: cx.failed,
    })
}

/// Two lobes of equal radius on either side of a flat interface.
fn check_double(cx: &mut Ctx, a: u32, b: u32) {
    let (ra, rb) = match (cx.sphere(a), cx.sphere(b)) {
        (Some(fa), Some(fb)) => (fa.radius, fb.radius),
        _ => {
            cx.failed.push(format!("double_{a}_{b}: missing free boundary"));
            return;
        }
    };
    let tol = cx.tol().lambda_rel;
    cx.require(
        (ra - rb).abs() <= tol * ra.max(rb),
        format!("double_{a}_{b}: lobe radii {ra:.6} vs {rb:.6}"),
    );
    cx.require(
        cx.plane_normal(a, b).is_some(),
        format!("double_{a}_{b}: interface missing"),
    );
}

/// Chain `a – m – b` with flat interfaces; returns the branch and the
/// opening angle between the two planes, degrees.
fn check_lined_up(cx: &mut Ctx, m: u32, a: u32, b: u32) -> (String, f64) {
    let (Some(na), Some(nb)) = (cx.plane_normal(m, a), cx.plane_normal(m, b)) else {
        cx.failed.push("lined_up: missing interface".into());
        return ("unknown".into(), f64::NAN);
    };
    let opening = 180.0 - angle_deg(&na, &nb);
    let tol = cx.tol().wedge_deg;
    let branch = if opening.abs() <= tol {
        "parallel"
    } else if (opening - 60.0).abs() <= tol {
        "point_contact"
    } else if opening < 60.0 {
        "non_parallel"
    } else {
        cx.failed.push(format!("lined_up: plane opening {opening:.3}° exceeds 60°"));
        "unknown"
    };
    for outer in [a, b] {
        let ok = cx.pieces_of(outer) == 2;
        cx.require(ok, format!("lined_up: outer cell {outer} is not a single lobe"));
    }
    (branch.into(), opening)
}

/// Three flat interfaces through a common line with 120° wedges.
fn check_standard_triple(cx: &mut Ctx) -> Vec<f64> {
    let pairs = [(1u32, 2u32), (1, 3), (2, 3)];
    let normals: Vec<Option<Vec3>> = pairs.iter().map(|&(a, b)| cx.plane_normal(a, b)).collect();
    let Some(normals) = normals.into_iter().collect::<Option<Vec<Vec3>>>() else {
        cx.failed.push("standard_triple: missing interface".into());
        return Vec::new();
    };
    // common line direction from the pairwise plane intersections
    let mut axis = normals[0].cross(&normals[1]);
    if axis.norm() < 1e-12 {
        cx.failed.push("standard_triple: interfaces are parallel".into());
        return Vec::new();
    }
    axis.normalize_mut();
    let through: Vec<Vec3> = pairs
        .iter()
        .map(|&(a, b)| Vec3::from(cx.fits[&Label::new(a, b)].center))
        .collect();
    let origin = through.iter().sum::<Vec3>() / 3.0;
    let e1 = (through[0] - origin - axis * axis.dot(&(through[0] - origin))).normalize();
    let e2 = axis.cross(&e1);
    // each half-plane leaves the common line along the in-plane direction
    // perpendicular to it, pointing toward the interface centroid
    let dirs: Vec<f64> = normals
        .iter()
        .zip(&through)
        .map(|(n, c)| {
            let mut u = axis.cross(n);
            if u.dot(&(c - origin)) < 0.0 {
                u = -u;
            }
            let phi = u.dot(&e2).atan2(u.dot(&e1));
            if phi < 0.0 {
                phi + 2.0 * PI
            } else {
                phi
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| dirs[i].total_cmp(&dirs[j]));
    let mut wedge = [0.0f64; 3];
    let mut by_region = [0.0f64; 3];
    for s in 0..3 {
        let (i, j) = (order[s], order[(s + 1) % 3]);
        let gap = if s < 2 { dirs[j] - dirs[i] } else { dirs[j] + 2.0 * PI - dirs[i] };
        wedge[s] = gap;
        // the region between consecutive half-planes is the one they share
        let shared = [pairs[i].0, pairs[i].1]
            .into_iter()
            .find(|r| *r == pairs[j].0 || *r == pairs[j].1)
            .unwrap_or(0);
        if shared >= 1 {
            by_region[shared as usize - 1] = gap;
        }
    }
    cx.require(angle_sum_witness(wedge), "standard_triple: wedge angles fail the angle-sum witness".into());
    let tol = cx.tol().wedge_deg;
    for (r, w) in by_region.iter().enumerate() {
        let deg = w.to_degrees();
        cx.require(
            (deg - 120.0).abs() <= tol,
            format!("standard_triple: wedge of region {} is {deg:.4}°", r + 1),
        );
    }
    by_region.iter().map(|w| w.to_degrees()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_examples() {
        assert!(angle_sum_witness([2.0 * PI / 3.0; 3]));
        assert!(angle_sum_witness([PI / 4.0, PI / 4.0, 1.5 * PI]));
        let e = 1e-3;
        assert!(!angle_sum_witness([PI / 3.0 - e; 3]));
    }

    #[test]
    fn pairing_table() {
        assert_eq!(Configuration::paired_with("triple_case_4"), Some(Configuration::StandardTriple));
        assert_eq!(Configuration::paired_with("triple_case_1"), Some(Configuration::DisjointBalls));
        assert_eq!(Configuration::paired_with("bogus"), None);
    }
}
