use std::collections::{BTreeSet, HashMap};
use std::fmt;

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Unordered pair of region indices `{lo, hi}` with `lo < hi`.
///
/// A face labeled `{lo, hi}` is oriented so that its right-hand normal points
/// from region `lo` into region `hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub lo: u32,
    pub hi: u32,
}

impl Label {
    /// Builds the label for regions `a` and `b` in either order.
    ///
    /// # Panics
    /// If `a == b`.
    pub fn new(a: u32, b: u32) -> Self {
        assert_ne!(a, b, "a face cannot separate a region from itself");
        Label {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn contains(self, region: u32) -> bool {
        self.lo == region || self.hi == region
    }

    /// +1 if `region` sees the face normal as outward, -1 if inward, 0 if not incident.
    pub fn sign(self, region: u32) -> f64 {
        if region == self.lo {
            1.0
        } else if region == self.hi {
            -1.0
        } else {
            0.0
        }
    }

    pub fn other(self, region: u32) -> u32 {
        if region == self.lo {
            self.hi
        } else {
            self.lo
        }
    }

    /// Parses the `i_j` form used for OBJ groups and report keys.
    pub fn parse(s: &str) -> Option<Label> {
        let (a, b) = s.split_once('_')?;
        let (a, b) = (a.parse().ok()?, b.parse().ok()?);
        (a != b).then(|| Label::new(a, b))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.lo, self.hi)
    }
}

/// Sorted vertex pair identifying an undirected edge.
pub type EdgeKey = (u32, u32);

pub fn edge_key(a: u32, b: u32) -> EdgeKey {
    (a.min(b), a.max(b))
}

/// Non-manifold triangle mesh with per-face region-pair labels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    pub labels: Vec<Label>,
}

/// Edge-to-face incidence of a mesh.
#[derive(Clone, Debug, Default)]
pub struct EdgeTopology {
    pub edges: HashMap<EdgeKey, Vec<u32>>,
}

impl EdgeTopology {
    /// Edges with exactly three incident faces, sorted.
    pub fn junction_edges(&self) -> Vec<EdgeKey> {
        let mut out: Vec<EdgeKey> = self
            .edges
            .iter()
            .filter(|(_, f)| f.len() == 3)
            .map(|(e, _)| *e)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn valence(&self, e: EdgeKey) -> usize {
        self.edges.get(&e).map_or(0, Vec::len)
    }
}

impl LabeledMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>, labels: Vec<Label>) -> Self {
        LabeledMesh {
            vertices,
            faces,
            labels,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Largest region index appearing in any label.
    pub fn num_regions(&self) -> usize {
        self.labels.iter().map(|l| l.hi as usize).max().unwrap_or(0)
    }

    /// Distinct labels in sorted order.
    pub fn label_set(&self) -> Vec<Label> {
        let s: BTreeSet<Label> = self.labels.iter().copied().collect();
        s.into_iter().collect()
    }

    pub fn corners(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Twice-area vector `(b - a) × (c - a)`.
    pub fn face_cross(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.corners(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        self.face_cross(f).normalize()
    }

    pub fn face_centroid(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.corners(f);
        (a + b + c) / 3.0
    }

    pub fn edge_topology(&self) -> EdgeTopology {
        let mut edges: HashMap<EdgeKey, Vec<u32>> = HashMap::with_capacity(self.faces.len() * 2);
        for (fi, f) in self.faces.iter().enumerate() {
            for i in 0..3 {
                edges
                    .entry(edge_key(f[i], f[(i + 1) % 3]))
                    .or_default()
                    .push(fi as u32);
            }
        }
        EdgeTopology { edges }
    }

    /// Face indices incident to `region`, in face order.
    pub fn region_faces(&self, region: u32) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&f| self.labels[f].contains(region))
            .collect()
    }

    /// Face indices carrying `label`, in face order.
    pub fn label_faces(&self, label: Label) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&f| self.labels[f] == label)
            .collect()
    }

    /// Faces of `region` with the vertex order flipped where needed so that
    /// the right-hand normal points out of the region.
    pub fn outward_faces(&self, region: u32) -> Vec<[u32; 3]> {
        self.region_faces(region)
            .into_iter()
            .map(|f| {
                let [a, b, c] = self.faces[f];
                if self.labels[f].lo == region {
                    [a, b, c]
                } else {
                    [a, c, b]
                }
            })
            .collect()
    }

    /// Checks that the boundary of `region` is closed and consistently oriented.
    pub fn check_region_closed(&self, region: u32) -> Result<()> {
        let mut directed: HashMap<(u32, u32), i32> = HashMap::new();
        let faces = self.outward_faces(region);
        if faces.is_empty() {
            return Err(Error::InvalidMesh(format!("region {region} has no faces")));
        }
        for f in &faces {
            for i in 0..3 {
                let (a, b) = (f[i], f[(i + 1) % 3]);
                let c = directed.entry((a, b)).or_insert(0);
                *c += 1;
                if *c > 1 {
                    return Err(Error::OrientationError { region, a, b });
                }
            }
        }
        let open = directed.keys().filter(|&&(a, b)| !directed.contains_key(&(b, a))).count();
        if open > 0 {
            return Err(Error::OpenSurface {
                region,
                open_edges: open,
            });
        }
        Ok(())
    }

    /// Validates the structural invariants of a cluster mesh: index bounds,
    /// edge valences 2 or 3, distinct oriented triples, non-degenerate faces
    /// and closed oriented boundaries for every region `1..=k`.
    pub fn validate(&self) -> Result<()> {
        if self.faces.len() != self.labels.len() {
            return Err(Error::InvalidMesh(format!(
                "{} faces but {} labels",
                self.faces.len(),
                self.labels.len()
            )));
        }
        let nv = self.vertices.len() as u32;
        let mut seen = HashMap::with_capacity(self.faces.len());
        for (fi, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("face {fi} references a missing vertex")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::DegenerateTriangle { face: fi });
            }
            let m = f.iter().position(|v| v == f.iter().min().unwrap()).unwrap();
            let canon = [f[m], f[(m + 1) % 3], f[(m + 2) % 3]];
            if seen.insert(canon, fi).is_some() {
                return Err(Error::InvalidMesh(format!("face {fi} duplicates an earlier face")));
            }
            if self.face_area(fi) <= 0.0 {
                return Err(Error::DegenerateTriangle { face: fi });
            }
            if self.corners(fi).iter().any(|p| !p.iter().all(|x| x.is_finite())) {
                return Err(Error::InvalidMesh(format!("face {fi} has non-finite coordinates")));
            }
        }
        let topo = self.edge_topology();
        let mut keys: Vec<_> = topo.edges.iter().collect();
        keys.sort_unstable_by_key(|(e, _)| **e);
        for (&(a, b), fs) in keys {
            if fs.len() > 3 {
                return Err(Error::InvalidValence {
                    a,
                    b,
                    valence: fs.len(),
                });
            }
        }
        for region in 1..=self.num_regions() as u32 {
            self.check_region_closed(region)?;
        }
        Ok(())
    }

    pub fn translate(&mut self, t: &Vec3) {
        for v in &mut self.vertices {
            *v += t;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.vertices {
            *v *= s;
        }
    }

    pub fn rotate(&mut self, r: &Rotation3<f64>) {
        for v in &mut self.vertices {
            *v = r * *v;
        }
    }

    /// Maps every region index through `map` (index 0 must map to 0).
    /// Faces whose two sides collapse to one region are dropped; faces whose
    /// order flips are reversed so the orientation convention still holds.
    pub fn relabel(&self, map: &dyn Fn(u32) -> u32) -> LabeledMesh {
        let mut out = LabeledMesh {
            vertices: self.vertices.clone(),
            ..Default::default()
        };
        for (f, l) in self.faces.iter().zip(&self.labels) {
            let (a, b) = (map(l.lo), map(l.hi));
            if a == b {
                continue;
            }
            let face = if a < b { *f } else { [f[0], f[2], f[1]] };
            out.faces.push(face);
            out.labels.push(Label::new(a, b));
        }
        out
    }

    /// Axis-aligned bounding box diagonal length.
    pub fn diameter_bound(&self) -> f64 {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        if self.vertices.is_empty() {
            0.0
        } else {
            (hi - lo).norm()
        }
    }

    pub fn mean_edge_length(&self) -> f64 {
        let mut total = 0.0;
        let mut n = 0usize;
        for f in &self.faces {
            for i in 0..3 {
                total += (self.vertices[f[i] as usize] - self.vertices[f[(i + 1) % 3] as usize]).norm();
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            total / n as f64
        }
    }

    /// Vertices touched by faces of `region`, sorted.
    pub fn region_vertices(&self, region: u32) -> Vec<u32> {
        let s: BTreeSet<u32> = self
            .region_faces(region)
            .into_iter()
            .flat_map(|f| self.faces[f])
            .collect();
        s.into_iter().collect()
    }

    /// Appends another mesh, offsetting its vertex indices.
    pub fn append(&mut self, other: &LabeledMesh) {
        let off = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
        self.labels.extend_from_slice(&other.labels);
    }
}
