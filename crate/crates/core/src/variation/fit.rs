use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{extract_junction_curves, Cluster, Label, LabeledMesh, Vec3};
use crate::par::Exec;
use crate::variation::angles::{junction_angles_with, JunctionStats};
use crate::variation::gradient::{area_gradient_with, volume_gradients, GradientField};

/// Least-squares multipliers for `G_A ≈ Σ λ_i G_Vi`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierFit {
    pub lambdas: Vec<f64>,
    pub residual: GradientField,
    pub residual_abs: f64,
    pub residual_rel: f64,
    pub rank_deficient: bool,
}

/// Solves the Gram system `⟨G_Vi, G_Vj⟩ λ = ⟨G_Vi, G_A⟩`, falling back to the
/// pseudo-inverse when the Gram matrix is numerically singular.
pub fn fit_gradients(ga: &GradientField, gvs: &[GradientField]) -> MultiplierFit {
    fit_gradients_weighted(ga, gvs, None)
}

/// As [`fit_gradients`] with an optional per-vertex inverse-mass weighting of
/// the inner product.
pub fn fit_gradients_weighted(
    ga: &GradientField,
    gvs: &[GradientField],
    inv_mass: Option<&[f64]>,
) -> MultiplierFit {
    let k = gvs.len();
    let ip = |a: &GradientField, b: &GradientField| match inv_mass {
        Some(w) => a.dot_weighted(b, w),
        None => a.dot(b),
    };
    let gram = DMatrix::from_fn(k, k, |i, j| ip(&gvs[i], &gvs[j]));
    let rhs = DVector::from_fn(k, |i, _| ip(&gvs[i], ga));
    let (lambdas, rank_deficient) = solve_gram(&gram, &rhs);
    let mut residual = ga.clone();
    for (l, g) in lambdas.iter().zip(gvs) {
        residual.axpy(-l, g);
    }
    let residual_abs = residual.norm();
    let ga_norm = ga.norm();
    let residual_rel = if ga_norm > 0.0 { residual_abs / ga_norm } else { 0.0 };
    MultiplierFit {
        lambdas,
        residual,
        residual_abs,
        residual_rel,
        rank_deficient,
    }
}

/// Returns the solution and whether the pseudo-inverse path was taken.
pub(crate) fn solve_gram(gram: &DMatrix<f64>, rhs: &DVector<f64>) -> (Vec<f64>, bool) {
    let k = gram.nrows();
    if k == 0 {
        return (Vec::new(), false);
    }
    let scale = (0..k).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    let svd = gram.clone().svd(true, true);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let x = svd
        .solve(rhs, tol)
        .map(|x| x.iter().copied().collect())
        .unwrap_or_else(|_| vec![0.0; k]);
    (x, rank < k)
}

/// Mean-curvature statistics for one interface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct InterfaceStats {
    pub area: f64,
    /// Area-weighted mean of per-vertex H; estimates `λ_hi − λ_lo`.
    pub mean_h: f64,
    pub std_h: f64,
    pub vertices: usize,
}

/// Output of [`fit_multipliers`]. Field order is the JSON key order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct VariationReport {
    pub lambdas: Vec<f64>,
    pub residual_abs: f64,
    pub residual_rel: f64,
    pub interfaces: BTreeMap<String, InterfaceStats>,
    pub junctions: BTreeMap<String, JunctionStats>,
    pub rank_deficient: bool,
}

impl VariationReport {
    /// Largest relative deviation of a junction median from 120°, degrees.
    pub fn worst_angle_deviation(&self) -> f64 {
        self.junctions
            .values()
            .flat_map(|j| j.pairs.iter().map(|p| (p.median_deg - 120.0).abs()))
            .fold(0.0, f64::max)
    }
}

/// Fits multipliers for a cluster and gathers curvature and junction statistics.
pub fn fit_multipliers(cluster: &Cluster) -> Result<VariationReport> {
    fit_multipliers_with(cluster, Exec::default())
}

pub fn fit_multipliers_with(cluster: &Cluster, exec: Exec) -> Result<VariationReport> {
    let mesh = &cluster.mesh;
    let ga = area_gradient_with(mesh, exec)?;
    let gvs = volume_gradients(mesh, cluster.k, exec);
    let fit = fit_gradients(&ga, &gvs);
    let interfaces = interface_curvatures(mesh)
        .into_iter()
        .map(|(l, s)| (l.to_string(), s))
        .collect();
    let mut junctions = BTreeMap::new();
    for (i, c) in extract_junction_curves(mesh)?.iter().enumerate() {
        junctions.insert(format!("curve_{i}"), junction_angles_with(mesh, c, &fit.lambdas));
    }
    Ok(VariationReport {
        lambdas: fit.lambdas,
        residual_abs: fit.residual_abs,
        residual_rel: fit.residual_rel,
        interfaces,
        junctions,
        rank_deficient: fit.rank_deficient,
    })
}

/// Per-vertex curvature of each interface, away from its boundary and junctions.
///
/// At a vertex `v` with restricted area gradient `a` and restricted local
/// volume gradient `g` (oriented lo → hi), `H_v = −⟨a, g⟩ / |g|²`.
pub fn interface_curvatures(mesh: &LabeledMesh) -> BTreeMap<Label, InterfaceStats> {
    let topo = mesh.edge_topology();
    let mut out = BTreeMap::new();
    for label in mesh.label_set() {
        let faces = mesh.label_faces(label);
        let n = mesh.num_vertices();
        let mut a = vec![Vec3::zeros(); n];
        let mut g = vec![Vec3::zeros(); n];
        let mut dual = vec![0.0; n];
        let mut boundary = vec![false; n];
        let mut area = 0.0;
        for &f in &faces {
            let tri = mesh.faces[f];
            let [p, q, r] = mesh.corners(f);
            let fa = mesh.face_area(f);
            area += fa;
            if let Some(ag) = crate::variation::gradient::triangle_area_gradient(&p, &q, &r) {
                let vg = mesh.face_cross(f) / 6.0;
                for i in 0..3 {
                    a[tri[i] as usize] += ag[i];
                    g[tri[i] as usize] += vg;
                    dual[tri[i] as usize] += fa / 3.0;
                }
            }
            for i in 0..3 {
                let e = crate::geometry::edge_key(tri[i], tri[(i + 1) % 3]);
                let same = topo.edges[&e]
                    .iter()
                    .filter(|&&h| mesh.labels[h as usize] == label)
                    .count();
                if same != 2 || topo.edges[&e].len() != 2 {
                    boundary[tri[i] as usize] = true;
                    boundary[tri[(i + 1) % 3] as usize] = true;
                }
            }
        }
        let (mut sw, mut swh, mut swh2, mut count) = (0.0, 0.0, 0.0, 0);
        for v in 0..n {
            if dual[v] == 0.0 || boundary[v] || g[v].norm_squared() == 0.0 {
                continue;
            }
            let h = -a[v].dot(&g[v]) / g[v].norm_squared();
            sw += dual[v];
            swh += dual[v] * h;
            swh2 += dual[v] * h * h;
            count += 1;
        }
        let (mean_h, std_h) = if sw > 0.0 {
            let m = swh / sw;
            (m, (swh2 / sw - m * m).max(0.0).sqrt())
        } else {
            (0.0, 0.0)
        };
        out.insert(
            label,
            InterfaceStats {
                area,
                mean_h,
                std_h,
                vertices: count,
            },
        );
    }
    out
}
