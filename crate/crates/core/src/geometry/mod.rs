//! Labeled meshes, clusters and their measures.

mod cluster;
mod graph;
mod junction;
pub mod measure;
mod mesh;

pub use cluster::{Cluster, Construction, ToleranceProfile};
pub use graph::{build_interaction_graph, default_threshold, InteractionGraph};
pub use junction::{extract_junction_curves, JunctionCurve};
pub use measure::{compute_interface_area, compute_volume};
pub use mesh::{edge_key, EdgeKey, EdgeTopology, Label, LabeledMesh, Vec3};
