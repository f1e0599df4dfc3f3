//! Meshed constructions of every stationary convex cluster with `k ≤ 3`.

mod balls;
pub mod delaunay;
mod double;
pub mod lattice;
mod lined_up;
pub mod solve;
mod triple;

use std::collections::BTreeMap;

use nalgebra::{Rotation3, Unit};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cluster, Construction, LabeledMesh, ToleranceProfile, Vec3};

pub use balls::{build_disjoint_balls, icosphere};
pub use delaunay::{generate_delaunay_profile, DelaunayKind, DelaunayProfile};
pub use double::{build_ball_plus_double_bubble, build_standard_double_bubble};
pub use lined_up::build_lined_up_triple;
pub use solve::{solve_double_bubble_radius, solve_standard_triple_radius};
pub use triple::build_standard_triple;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum ConfigurationKind {
    DisjointBalls,
    StandardDoubleBubble,
    BallPlusDoubleBubble,
    LinedUpTriple,
    StandardTriple,
}

impl ConfigurationKind {
    pub const ALL: [ConfigurationKind; 5] = [
        ConfigurationKind::DisjointBalls,
        ConfigurationKind::StandardDoubleBubble,
        ConfigurationKind::BallPlusDoubleBubble,
        ConfigurationKind::LinedUpTriple,
        ConfigurationKind::StandardTriple,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConfigurationKind::DisjointBalls => "disjoint_balls",
            ConfigurationKind::StandardDoubleBubble => "standard_double_bubble",
            ConfigurationKind::BallPlusDoubleBubble => "ball_plus_double_bubble",
            ConfigurationKind::LinedUpTriple => "lined_up_triple",
            ConfigurationKind::StandardTriple => "standard_triple",
        }
    }
}

/// Middle-cell variant of a lined-up triple bubble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum LinedUpBranch {
    NonParallel,
    Parallel,
    PointContact,
}

impl LinedUpBranch {
    pub const ALL: [LinedUpBranch; 3] = [LinedUpBranch::NonParallel, LinedUpBranch::Parallel, LinedUpBranch::PointContact];

    pub fn as_str(self) -> &'static str {
        match self {
            LinedUpBranch::NonParallel => "non_parallel",
            LinedUpBranch::Parallel => "parallel",
            LinedUpBranch::PointContact => "point_contact",
        }
    }
}

/// Target mesh resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(untagged)]
pub enum Resolution {
    /// Target edge length in absolute units.
    Absolute(f64),
    Tagged(TaggedResolution),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TaggedResolution {
    /// Absolute edge length.
    EdgeLength(f64),
    /// Edge length as a fraction of the sphere radius.
    Relative(f64),
    /// Lattice subdivisions per macro edge.
    Frequency(usize),
    /// Icosphere level `L`, i.e. frequency `2^L`.
    IcosphereLevel(u32),
}

impl Resolution {
    /// Lattice frequency for a piece of sphere radius `r`.
    pub fn frequency(&self, r: f64) -> Result<usize> {
        let n = match *self {
            Resolution::Absolute(h) | Resolution::Tagged(TaggedResolution::EdgeLength(h)) => {
                if !(h > 0.0) {
                    return Err(Error::InvalidSpec(format!("resolution must be positive, got {h}")));
                }
                (r / h * (1.0 - 1e-12)).ceil() as usize
            }
            Resolution::Tagged(TaggedResolution::Relative(x)) => {
                if !(x > 0.0) {
                    return Err(Error::InvalidSpec(format!("relative resolution must be positive, got {x}")));
                }
                (1.0 / x * (1.0 - 1e-12)).ceil() as usize
            }
            Resolution::Tagged(TaggedResolution::Frequency(n)) => n,
            Resolution::Tagged(TaggedResolution::IcosphereLevel(l)) => 1usize << l.min(12),
        };
        if n < 3 {
            return Err(Error::ResolutionTooCoarse { subdivisions: n });
        }
        Ok(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RotationSpec {
    pub axis: [f64; 3],
    pub angle_deg: f64,
}

/// Relative placement of separate pieces plus an optional rigid motion.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    /// Request tangency between consecutive pieces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangent: Option<bool>,
    /// Surface-to-surface gap when not tangent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    /// Direction from the first lobe's center toward the ball.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<[f64; 3]>,
    /// Explicit ball centers for disjoint balls.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<RotationSpec>,
}

impl Placement {
    pub fn is_tangent(&self) -> bool {
        self.tangent.unwrap_or(false)
    }

    /// Applies the rigid motion (rotation about the origin, then translation).
    pub fn apply_motion(&self, mesh: &mut LabeledMesh) -> Result<()> {
        if let Some(rot) = &self.rotation {
            let axis = Vec3::from(rot.axis);
            let axis = Unit::try_new(axis, 1e-300)
                .ok_or_else(|| Error::InvalidSpec("rotation axis must be non-zero".into()))?;
            mesh.rotate(&Rotation3::from_axis_angle(&axis, rot.angle_deg.to_radians()));
        }
        if let Some(t) = self.translation {
            mesh.translate(&Vec3::from(t));
        }
        Ok(())
    }
}

/// Declarative description of a catalogue configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationSpec {
    pub kind: ConfigurationKind,
    pub volumes: Vec<f64>,
    pub resolution: Resolution,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<Placement>,
    /// Lined-up triple only: which middle-cell variant to build.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<LinedUpBranch>,
    /// Lined-up triple, non-parallel branch only: wedge opening, degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wedge_angle_deg: Option<f64>,
}

impl ConfigurationSpec {
    pub fn new(kind: ConfigurationKind, volumes: Vec<f64>, resolution: Resolution) -> Self {
        ConfigurationSpec {
            kind,
            volumes,
            resolution,
            seed: 0,
            placement: None,
            branch: None,
            wedge_angle_deg: None,
        }
    }

    pub fn with_branch(mut self, branch: LinedUpBranch) -> Self {
        self.branch = Some(branch);
        self
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = Some(placement);
        self
    }

    pub fn placement(&self) -> Placement {
        self.placement.clone().unwrap_or_default()
    }

    /// Checks volume count and positivity for the kind.
    pub fn check_volumes(&self) -> Result<()> {
        let n = self.volumes.len();
        let ok = match self.kind {
            ConfigurationKind::DisjointBalls => (1..=3).contains(&n),
            ConfigurationKind::StandardDoubleBubble => n == 2,
            _ => n == 3,
        };
        if !ok {
            return Err(Error::InvalidSpec(format!(
                "{} takes {} volumes, got {n}",
                self.kind.as_str(),
                match self.kind {
                    ConfigurationKind::DisjointBalls => "1 to 3",
                    ConfigurationKind::StandardDoubleBubble => "2",
                    _ => "3",
                }
            )));
        }
        for &v in &self.volumes {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveVolume(v));
            }
        }
        Ok(())
    }
}

/// Summary written next to the meshes by `bubble build`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct BuildReport {
    pub kind: String,
    pub branch: String,
    pub target_volumes: Vec<f64>,
    pub achieved_volumes: Vec<f64>,
    pub radii: Vec<f64>,
    pub frequency: usize,
    pub vertices: usize,
    pub faces: usize,
    pub parameters: BTreeMap<String, f64>,
}

impl BuildReport {
    pub fn new(cluster: &Cluster) -> Self {
        let c = cluster.construction.clone().unwrap_or_default();
        BuildReport {
            kind: c.kind,
            branch: c.branch,
            target_volumes: cluster.target_volumes.clone(),
            achieved_volumes: cluster.volumes(),
            radii: c.radii,
            frequency: c.frequency,
            vertices: cluster.mesh.num_vertices(),
            faces: cluster.mesh.num_faces(),
            parameters: c.parameters,
        }
    }
}

/// Dispatches on `spec.kind`.
pub fn build(spec: &ConfigurationSpec) -> Result<Cluster> {
    match spec.kind {
        ConfigurationKind::DisjointBalls => build_disjoint_balls(spec),
        ConfigurationKind::StandardDoubleBubble => build_standard_double_bubble(spec),
        ConfigurationKind::BallPlusDoubleBubble => build_ball_plus_double_bubble(spec),
        ConfigurationKind::LinedUpTriple => build_lined_up_triple(spec),
        ConfigurationKind::StandardTriple => build_standard_triple(spec),
    }
}

pub(crate) fn expect_kind(spec: &ConfigurationSpec, kind: ConfigurationKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::InvalidSpec(format!(
            "expected kind {}, got {}",
            kind.as_str(),
            spec.kind.as_str()
        )));
    }
    spec.check_volumes()
}

pub(crate) fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Wraps a finished mesh into a cluster with resolution-scaled tolerances.
pub(crate) fn finish_cluster(
    spec: &ConfigurationSpec,
    mut mesh: LabeledMesh,
    construction: Construction,
) -> Result<Cluster> {
    spec.placement().apply_motion(&mut mesh)?;
    let rel_h = 1.0 / construction.frequency.max(1) as f64;
    let k = mesh.num_regions();
    Ok(Cluster {
        k,
        target_volumes: spec.volumes.clone(),
        mesh,
        tolerance: ToleranceProfile::default().for_resolution(rel_h),
        construction: Some(construction),
    })
}
