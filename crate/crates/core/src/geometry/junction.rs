use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{edge_key, EdgeKey, Label, LabeledMesh};

/// Maximal chain of valence-3 edges carrying one label triple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JunctionCurve {
    /// Vertex chain; for a loop the first vertex is repeated at the end.
    pub vertices: Vec<u32>,
    /// Sorted labels of the three sheets meeting along the curve.
    pub labels: [Label; 3],
    pub closed: bool,
}

impl JunctionCurve {
    pub fn edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.vertices.windows(2).map(|w| edge_key(w[0], w[1]))
    }

    pub fn num_edges(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Chain endpoints; empty for loops.
    pub fn endpoints(&self) -> Vec<u32> {
        if self.closed {
            Vec::new()
        } else {
            vec![self.vertices[0], *self.vertices.last().unwrap()]
        }
    }
}

/// Splits the valence-3 edges of `mesh` into connected chains.
///
/// A chain ends where the junction graph branches or where the incident label
/// triple changes. Output order is deterministic.
pub fn extract_junction_curves(mesh: &LabeledMesh) -> Result<Vec<JunctionCurve>> {
    let topo = mesh.edge_topology();
    let mut triples: BTreeMap<EdgeKey, [Label; 3]> = BTreeMap::new();
    for (&e, fs) in &topo.edges {
        match fs.len() {
            3 => {
                let mut t = [
                    mesh.labels[fs[0] as usize],
                    mesh.labels[fs[1] as usize],
                    mesh.labels[fs[2] as usize],
                ];
                t.sort();
                triples.insert(e, t);
            }
            n if n > 3 => {
                return Err(Error::InvalidValence {
                    a: e.0,
                    b: e.1,
                    valence: n,
                })
            }
            _ => {}
        }
    }
    let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &(a, b) in triples.keys() {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    for n in adj.values_mut() {
        n.sort_unstable();
    }
    let is_special = |v: u32| {
        let n = &adj[&v];
        n.len() != 2 || triples[&edge_key(v, n[0])] != triples[&edge_key(v, n[1])]
    };

    let mut used: HashSet<EdgeKey> = HashSet::new();
    let mut curves = Vec::new();
    let walk = |start: u32, next: u32, used: &mut HashSet<EdgeKey>| {
        let labels = triples[&edge_key(start, next)];
        let mut chain = vec![start, next];
        used.insert(edge_key(start, next));
        let (mut prev, mut cur) = (start, next);
        while cur != start && !is_special(cur) {
            let n = &adj[&cur];
            let nxt = if n[0] == prev { n[1] } else { n[0] };
            if !used.insert(edge_key(cur, nxt)) {
                break;
            }
            chain.push(nxt);
            prev = cur;
            cur = nxt;
        }
        let closed = chain.len() > 2 && chain[0] == *chain.last().unwrap();
        JunctionCurve {
            vertices: chain,
            labels,
            closed,
        }
    };

    let verts: Vec<u32> = adj.keys().copied().collect();
    for &v in verts.iter().filter(|&&v| is_special(v)) {
        for &w in &adj[&v] {
            if !used.contains(&edge_key(v, w)) {
                let mut c = walk(v, w, &mut used);
                c.closed = false;
                curves.push(c);
            }
        }
    }
    for &v in &verts {
        for &w in &adj[&v] {
            if !used.contains(&edge_key(v, w)) {
                curves.push(walk(v, w, &mut used));
            }
        }
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    /// Three fans sharing the polyline 0-1-2 along the x axis.
    fn y_strip() -> LabeledMesh {
        let mut v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        let mut faces = Vec::new();
        let mut labels = Vec::new();
        for (k, l) in [Label::new(0, 1), Label::new(1, 2), Label::new(0, 2)].iter().enumerate() {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let base = v.len() as u32;
            for x in 0..3 {
                v.push(Vec3::new(x as f64, ang.cos(), ang.sin()));
            }
            for x in 0..2u32 {
                faces.push([x, x + 1, base + x]);
                labels.push(*l);
                faces.push([x + 1, base + x + 1, base + x]);
                labels.push(*l);
            }
        }
        LabeledMesh::new(v, faces, labels)
    }

    #[test]
    fn open_chain_is_found() {
        let c = extract_junction_curves(&y_strip()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].vertices, vec![0, 1, 2]);
        assert!(!c[0].closed);
    }

    #[test]
    fn four_sheets_on_an_edge_is_invalid() {
        let mut m = y_strip();
        m.vertices.push(Vec3::new(0.5, -1.0, -1.0));
        m.faces.push([0, 1, 9]);
        m.labels.push(Label::new(2, 3));
        assert!(matches!(
            extract_junction_curves(&m),
            Err(Error::InvalidValence { valence: 4, .. })
        ));
    }
}
