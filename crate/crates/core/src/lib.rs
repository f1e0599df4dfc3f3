//! Stationary convex bubble clusters in R³.
//!
//! Labeled non-manifold triangle meshes model clusters of `k` regions; the
//! exterior is region 0 and every face carries the unordered pair of regions
//! it separates. On top of that data model the crate provides
//!
//! * [`geometry`]: measures (areas, volumes), junction curves, the interaction graph;
//! * [`catalogue`]: meshed constructions of every stationary convex configuration for `k ≤ 3`;
//! * [`variation`]: discrete first variation, Lagrange multipliers, junction angles;
//! * [`flow`]: volume-constrained area descent and the configuration classifier;
//! * [`io`] and [`cli`]: OFF/OBJ files, JSON reports and the `bubble` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod catalogue;
pub mod cli;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod par;
pub mod variation;

pub use error::{Error, Result};
pub use geometry::{Cluster, Label, LabeledMesh, ToleranceProfile, Vec3};
