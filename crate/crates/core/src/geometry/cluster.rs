use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::measure::{all_volumes, winding_number};
use crate::geometry::LabeledMesh;
use crate::par::Exec;

/// Numeric tolerances used by verification and classification.
///
/// Values are calibrated for meshes with edge length `r/20`; see
/// [`ToleranceProfile::for_resolution`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ToleranceProfile {
    pub name: String,
    /// Junction dihedral angle deviation from 120°, degrees.
    pub angle_deg: f64,
    /// Relative spread allowed between multipliers of interacting regions.
    pub lambda_rel: f64,
    /// Bound on the relative stationarity residual.
    pub residual_rel: f64,
    /// Relative volume error.
    pub volume_rel: f64,
    /// Sphere/plane fit RMS relative to the region radius.
    pub fit_rel: f64,
    /// Convexity defect relative to region diameter.
    pub convexity_rel: f64,
    /// Surface distance relative to the smaller radius below which two regions are tangent.
    pub tangency_rel: f64,
    /// Interaction threshold relative to total area.
    pub interaction_rel: f64,
    /// Wedge-angle deviation, degrees.
    pub wedge_deg: f64,
    /// Y-cone defect bound.
    pub y_cone: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        ToleranceProfile {
            name: "default".into(),
            angle_deg: 1.0,
            lambda_rel: 0.02,
            residual_rel: 0.02,
            volume_rel: 0.005,
            fit_rel: 0.005,
            convexity_rel: 1e-6,
            tangency_rel: 1e-3,
            interaction_rel: 1e-6,
            wedge_deg: 0.5,
            y_cone: 1e-9,
        }
    }
}

impl ToleranceProfile {
    pub const NAMES: [&'static str; 3] = ["default", "strict", "loose"];

    pub fn named(name: &str) -> Option<Self> {
        let base = ToleranceProfile::default();
        let mul = match name {
            "default" => return Some(base),
            "strict" => 0.5,
            "loose" => 2.0,
            _ => return None,
        };
        Some(ToleranceProfile {
            name: name.into(),
            ..base.scaled_by(mul)
        })
    }

    /// Multiplies every discretization-dependent tolerance by `s`.
    pub fn scaled_by(&self, s: f64) -> Self {
        ToleranceProfile {
            name: self.name.clone(),
            angle_deg: self.angle_deg * s,
            lambda_rel: self.lambda_rel * s,
            residual_rel: self.residual_rel * s,
            volume_rel: self.volume_rel * s,
            fit_rel: self.fit_rel * s,
            wedge_deg: self.wedge_deg * s,
            ..self.clone()
        }
    }

    /// Loosens O(h) tolerances for meshes coarser than `r/20`; `rel_h` is the
    /// edge length divided by the radius. Finer meshes keep the base values.
    pub fn for_resolution(&self, rel_h: f64) -> Self {
        self.scaled_by((rel_h * 20.0).max(1.0))
    }
}

/// Parameters recorded by a catalogue constructor.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub kind: String,
    pub branch: String,
    /// Sphere radius of each region's free boundary, 1-based order.
    pub radii: Vec<f64>,
    /// Lattice frequency per macro edge.
    pub frequency: usize,
    pub parameters: BTreeMap<String, f64>,
}

/// `k` regions with target volumes realized by a labeled mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub k: usize,
    pub target_volumes: Vec<f64>,
    pub mesh: LabeledMesh,
    pub tolerance: ToleranceProfile,
    pub construction: Option<Construction>,
}

impl Cluster {
    /// Wraps a mesh, taking its current volumes as targets.
    pub fn from_mesh(mesh: LabeledMesh) -> Self {
        let k = mesh.num_regions();
        let target_volumes = all_volumes(&mesh, k, Exec::default());
        Cluster {
            k,
            target_volumes,
            mesh,
            tolerance: ToleranceProfile::default(),
            construction: None,
        }
    }

    pub fn volumes(&self) -> Vec<f64> {
        all_volumes(&self.mesh, self.k, Exec::default())
    }

    /// Mesh invariants, positive volumes and pairwise non-overlap.
    pub fn validate(&self) -> Result<()> {
        self.mesh.validate()?;
        for (i, v) in self.volumes().iter().enumerate() {
            if *v <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "region {} has non-positive volume {v}",
                    i + 1
                )));
            }
        }
        self.check_non_overlap(256)
    }

    /// Samples up to `samples` vertices of each region that are not shared
    /// with region `j` and rejects any whose winding number with respect to
    /// region `j` indicates an interior point.
    pub fn check_non_overlap(&self, samples: usize) -> Result<()> {
        for i in 1..=self.k as u32 {
            let vi = self.mesh.region_vertices(i);
            for j in 1..=self.k as u32 {
                if i == j {
                    continue;
                }
                let vj: std::collections::HashSet<u32> =
                    self.mesh.region_vertices(j).into_iter().collect();
                let cand: Vec<u32> = vi.iter().copied().filter(|v| !vj.contains(v)).collect();
                let stride = (cand.len() / samples.max(1)).max(1);
                for &v in cand.iter().step_by(stride) {
                    let w = winding_number(&self.mesh, j, &self.mesh.vertices[v as usize]);
                    if w > 0.75 {
                        return Err(Error::OverlapError(format!(
                            "vertex {v} of region {i} lies inside region {j}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
