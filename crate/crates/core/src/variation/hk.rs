use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::measure::compute_volume;
use crate::geometry::{LabeledMesh, Vec3};
use crate::par::pairwise_sum;
use crate::variation::cone::check_convex;
use crate::variation::gradient::triangle_area_gradient;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeintzeKarcher {
    /// Enclosed volume.
    pub lhs: f64,
    /// `(2/3) Σ area / H` over faces with positive curvature.
    pub rhs: f64,
    pub gap_rel: f64,
    /// Fraction of boundary area excluded for non-positive curvature.
    pub excluded_fraction: f64,
}

/// Heintze–Karcher comparison `|C| ≤ (2/3) ∫ 1/H` for one convex region.
///
/// Vertex curvature is `H_v = ⟨a_v, g_v⟩ / |g_v|²` with `a`, `g` the area and
/// volume gradients of the region's boundary; face curvature is the mean of
/// its three vertices.
pub fn heintze_karcher_check(mesh: &LabeledMesh, region: u32) -> Result<HeintzeKarcher> {
    check_convex(mesh, region, 1e-6)?;
    let lhs = compute_volume(mesh, region)?;
    let faces = mesh.outward_faces(region);
    let n = mesh.num_vertices();
    let mut a = vec![Vec3::zeros(); n];
    let mut g = vec![Vec3::zeros(); n];
    let mut areas = Vec::with_capacity(faces.len());
    for f in &faces {
        let [p, q, r] = f.map(|v| mesh.vertices[v as usize]);
        let ag = triangle_area_gradient(&p, &q, &r).ok_or(Error::DegenerateTriangle { face: 0 })?;
        let vg = (q - p).cross(&(r - p)) / 6.0;
        for i in 0..3 {
            a[f[i] as usize] += ag[i];
            g[f[i] as usize] += vg;
        }
        areas.push(0.5 * (q - p).cross(&(r - p)).norm());
    }
    let h: Vec<f64> = (0..n)
        .map(|v| {
            let gg = g[v].norm_squared();
            if gg > 0.0 {
                a[v].dot(&g[v]) / gg
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = pairwise_sum(&areas);
    let eps = 1e-9 * total.sqrt().recip();
    let mut terms = Vec::with_capacity(faces.len());
    let mut excluded = Vec::new();
    for (f, area) in faces.iter().zip(&areas) {
        let hf = f.iter().map(|&v| h[v as usize]).sum::<f64>() / 3.0;
        if hf > eps {
            terms.push(area / hf);
        } else {
            excluded.push(*area);
        }
    }
    let excluded_fraction = pairwise_sum(&excluded) / total;
    if excluded_fraction > 0.05 {
        return Err(Error::CurvatureUnavailable {
            excluded_fraction: 100.0 * excluded_fraction,
        });
    }
    let rhs = 2.0 / 3.0 * pairwise_sum(&terms);
    Ok(HeintzeKarcher {
        lhs,
        rhs,
        gap_rel: (rhs - lhs) / lhs,
        excluded_fraction,
    })
}
