use serde::Serialize;

use crate::geometry::measure::{compute_interface_area, total_area};
use crate::geometry::{Cluster, Label};
use crate::par::Exec;

/// Which regions share a boundary of positive area.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InteractionGraph {
    pub k: usize,
    /// Symmetric `k × k` matrix; row `i` is region `i + 1`.
    pub pair_areas: Vec<Vec<f64>>,
    pub threshold: f64,
}

impl InteractionGraph {
    /// `true` if regions `i` and `j` (1-based) interact.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.pair_areas[i - 1][j - 1] > self.threshold
    }

    /// Interacting pairs `(i, j)` with `i < j`, 1-based.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 1..=self.k {
            for j in i + 1..=self.k {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn degree(&self, i: usize) -> usize {
        (1..=self.k).filter(|&j| self.has_edge(i, j)).count()
    }
}

/// Default interaction threshold: `1e-6 ×` total mesh area.
pub fn default_threshold(cluster: &Cluster) -> f64 {
    1e-6 * total_area(&cluster.mesh, Exec::default())
}

pub fn build_interaction_graph(cluster: &Cluster, threshold: f64) -> InteractionGraph {
    let k = cluster.k;
    let mut pair_areas = vec![vec![0.0; k]; k];
    for i in 1..=k {
        for j in i + 1..=k {
            let a = compute_interface_area(&cluster.mesh, Label::new(i as u32, j as u32));
            pair_areas[i - 1][j - 1] = a;
            pair_areas[j - 1][i - 1] = a;
        }
    }
    InteractionGraph {
        k,
        pair_areas,
        threshold,
    }
}
