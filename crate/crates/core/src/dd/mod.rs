//! Overlapping decompositions: geometric partitions, overlap growth,
//! restriction index sets and multiplicity partitions of unity.
//!
//! Everything here is generic over the finite element space through
//! [`DofMap`], so the same decomposition code serves Lagrange nodes and
//! edge elements.

mod local;

pub use local::{assemble_local_matrices, HelmholtzLocal};
pub(crate) use local::local_operator;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::helmholtz::mesh::{Mesh, NONE};

/// Element → global DOF connectivity of a discrete space on a mesh.
pub trait DofMap {
    fn n_dofs(&self) -> usize;
    /// DOFs of element `e`; eliminated DOFs are simply omitted.
    fn element_dofs(&self, e: usize) -> Vec<usize>;
}

impl DofMap for Mesh {
    fn n_dofs(&self) -> usize {
        Mesh::n_dofs(self)
    }
    fn element_dofs(&self, e: usize) -> Vec<usize> {
        Mesh::element_dofs(self, e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionShape {
    /// `N` vertical strips.
    Strips,
    /// `px × py` boxes.
    Grid(usize, usize),
    /// Boxes with `px/py` close to the domain aspect ratio.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapMode {
    /// Grow the refined non-overlapping partition ring by ring on the fine mesh.
    Minimum,
    /// Grow on the coarse mesh the fine mesh was refined from.
    Coarse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapSpec {
    pub mode: OverlapMode,
    pub layers: usize,
}

impl Default for OverlapSpec {
    fn default() -> Self {
        Self { mode: OverlapMode::Minimum, layers: 1 }
    }
}

/// Factor pair `px·py = n` whose ratio best matches `aspect = width/height`.
pub fn grid_for(n: usize, aspect: f64) -> (usize, usize) {
    let mut best = (n, 1, f64::INFINITY);
    // descending px: ties go to more parts along x
    for px in (1..=n).rev() {
        if n % px != 0 {
            continue;
        }
        let py = n / px;
        let score = ((px as f64 / py as f64) / aspect).ln().abs();
        if score < best.2 - 1e-12 {
            best = (px, py, score);
        }
    }
    (best.0, best.1)
}

/// Assigns each element to one of `n` parts by the centroid of its coarsest
/// ancestor, so partitions of refined meshes are refinements of coarse ones.
pub fn partition_geometric(mesh: &Mesh, n: usize, shape: PartitionShape) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Config("number of subdomains must be >= 1".into()));
    }
    if n > mesh.n_elements() {
        return Err(Error::Config(format!("{n} subdomains for {} elements", mesh.n_elements())));
    }
    let (px, py) = match shape {
        PartitionShape::Strips => (n, 1),
        PartitionShape::Grid(px, py) => {
            if px * py != n {
                return Err(Error::Config(format!("grid {px}x{py} does not give {n} parts")));
            }
            (px, py)
        }
        PartitionShape::Auto => grid_for(n, mesh.width() / mesh.height()),
    };
    let [x0, y0] = mesh.origin();
    let (w, h) = (mesh.width(), mesh.height());
    let part_of = |c: [f64; 2]| {
        let ix = (((c[0] - x0) / w * px as f64).floor() as isize).clamp(0, px as isize - 1) as usize;
        let iy = (((c[1] - y0) / h * py as f64).floor() as isize).clamp(0, py as isize - 1) as usize;
        iy * px + ix
    };
    let parts: Vec<usize> = match mesh.ancestry() {
        Some(anc) => {
            let root: Vec<usize> = (0..anc.root.n_elements()).map(|e| part_of(anc.root.centroid(e))).collect();
            anc.root_element.iter().map(|&r| root[r]).collect()
        }
        None => (0..mesh.n_elements()).map(|e| part_of(mesh.centroid(e))).collect(),
    };
    let mut counts = vec![0usize; n];
    for &p in &parts {
        counts[p] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Config(format!("partition leaves part {empty} empty; mesh too coarse for {px}x{py}")));
    }
    Ok(parts)
}

/// Adds every element sharing a vertex with the set, `layers` times.
fn grow(mesh: &Mesh, vertex_elements: &[Vec<usize>], member: &mut [bool], layers: usize) {
    for _ in 0..layers {
        let mut touched = vec![false; mesh.n_vertices()];
        for (e, tri) in mesh.triangles().iter().enumerate() {
            if member[e] {
                for &v in tri {
                    touched[v] = true;
                }
            }
        }
        for (v, t) in touched.iter().enumerate() {
            if *t {
                for &e in &vertex_elements[v] {
                    member[e] = true;
                }
            }
        }
    }
}

/// One overlapping subdomain.
#[derive(Debug, Clone)]
pub struct Subdomain {
    /// Sorted global DOFs; defines the restriction `R_j`.
    pub dofs: Vec<usize>,
    /// Partition-of-unity weights `D_j`, aligned with `dofs`.
    pub weights: Vec<f64>,
    /// Sorted elements of the overlapping subdomain.
    pub elements: Vec<usize>,
    /// Local indices of DOFs shared with elements outside the subdomain.
    pub interface: Vec<usize>,
    /// Mesh edges between a subdomain element and an outside element.
    pub interface_edges: Vec<usize>,
}

impl Subdomain {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    /// Global → local index table, `usize::MAX` for DOFs outside.
    pub fn local_index(&self, n_global: usize) -> Vec<usize> {
        let mut map = vec![usize::MAX; n_global];
        for (l, &g) in self.dofs.iter().enumerate() {
            map[g] = l;
        }
        map
    }

    /// `R_j v`.
    pub fn restrict(&self, v: &[C64]) -> Vec<C64> {
        self.dofs.iter().map(|&g| v[g]).collect()
    }

    /// `out += R_jᵀ D_j u`.
    pub fn prolong_weighted_add(&self, u: &[C64], out: &mut [C64]) {
        for ((&g, &w), &x) in self.dofs.iter().zip(&self.weights).zip(u) {
            out[g] += x * w;
        }
    }

    /// `out += R_jᵀ u`.
    pub fn prolong_add(&self, u: &[C64], out: &mut [C64]) {
        for (&g, &x) in self.dofs.iter().zip(u) {
            out[g] += x;
        }
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub n_dofs: usize,
    pub subdomains: Vec<Subdomain>,
    pub overlap: OverlapSpec,
    /// Non-overlapping element partition the subdomains grew from.
    pub partition: Vec<usize>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    /// Number of subdomains containing each DOF.
    pub fn multiplicity(&self) -> Vec<usize> {
        let mut m = vec![0usize; self.n_dofs];
        for s in &self.subdomains {
            for &g in &s.dofs {
                m[g] += 1;
            }
        }
        m
    }

    /// `max |Σ_j R_jᵀ D_j R_j − I|`; the operator is diagonal.
    pub fn pou_defect(&self) -> f64 {
        let mut acc = vec![0.0f64; self.n_dofs];
        for s in &self.subdomains {
            for (&g, &w) in s.dofs.iter().zip(&s.weights) {
                acc[g] += w;
            }
        }
        acc.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Grows a non-overlapping element partition into overlapping subdomains and
/// fills in the DOF sets, interfaces and partition of unity.
pub fn extend_overlap(
    mesh: &Mesh,
    space: &dyn DofMap,
    partition: &[usize],
    n_parts: usize,
    spec: OverlapSpec,
) -> Result<Decomposition> {
    if partition.len() != mesh.n_elements() {
        return Err(Error::Structural("partition length differs from element count".into()));
    }
    if let Some(&bad) = partition.iter().find(|&&p| p >= n_parts) {
        return Err(Error::Structural(format!("part id {bad} >= {n_parts}")));
    }
    let members: Vec<Vec<bool>> = match spec.mode {
        OverlapMode::Minimum => {
            let ve = mesh.vertex_elements();
            (0..n_parts)
                .map(|j| {
                    let mut m: Vec<bool> = partition.iter().map(|&p| p == j).collect();
                    grow(mesh, &ve, &mut m, spec.layers);
                    m
                })
                .collect()
        }
        OverlapMode::Coarse => {
            let anc = mesh
                .ancestry()
                .ok_or_else(|| Error::Config("coarse overlap needs a mesh produced by refine_uniform".into()))?;
            let root = &anc.root;
            let mut root_part = vec![usize::MAX; root.n_elements()];
            for (e, &r) in anc.root_element.iter().enumerate() {
                if root_part[r] != usize::MAX && root_part[r] != partition[e] {
                    return Err(Error::Config("partition is not a refinement of a coarse partition".into()));
                }
                root_part[r] = partition[e];
            }
            let ve = root.vertex_elements();
            (0..n_parts)
                .map(|j| {
                    let mut m: Vec<bool> = root_part.iter().map(|&p| p == j).collect();
                    grow(root, &ve, &mut m, spec.layers);
                    anc.root_element.iter().map(|&r| m[r]).collect()
                })
                .collect()
        }
    };
    let n = space.n_dofs();
    let elem_dofs: Vec<Vec<usize>> = (0..mesh.n_elements()).map(|e| space.element_dofs(e)).collect();
    let mut subdomains = Vec::with_capacity(n_parts);
    for member in &members {
        let mut inside = vec![false; n];
        let mut outside = vec![false; n];
        let mut elements = Vec::new();
        for (e, dofs) in elem_dofs.iter().enumerate() {
            let flags = if member[e] {
                elements.push(e);
                &mut inside
            } else {
                &mut outside
            };
            for &d in dofs {
                flags[d] = true;
            }
        }
        if elements.is_empty() {
            return Err(Error::Config("empty subdomain".into()));
        }
        let dofs: Vec<usize> = (0..n).filter(|&d| inside[d]).collect();
        let interface = dofs.iter().enumerate().filter(|(_, &g)| outside[g]).map(|(l, _)| l).collect();
        let interface_edges = mesh
            .edge_elements()
            .iter()
            .enumerate()
            .filter(|(_, adj)| adj[1] != NONE && member[adj[0]] != member[adj[1]])
            .map(|(e, _)| e)
            .collect();
        subdomains.push(Subdomain { dofs, weights: Vec::new(), elements, interface, interface_edges });
    }
    let mut dec = Decomposition { n_dofs: n, subdomains, overlap: spec, partition: partition.to_vec() };
    if let Some(d) = dec.multiplicity().iter().position(|&m| m == 0) {
        return Err(Error::Structural(format!("DOF {d} belongs to no subdomain")));
    }
    build_partition_of_unity(&mut dec);
    Ok(dec)
}

/// Sets `D_j(d) = 1/multiplicity(d)`.
pub fn build_partition_of_unity(dec: &mut Decomposition) {
    let mult = dec.multiplicity();
    for s in &mut dec.subdomains {
        s.weights = s.dofs.iter().map(|&g| 1.0 / mult[g] as f64).collect();
    }
}

/// Convenience: partition, overlap and partition of unity in one call.
pub fn decompose(mesh: &Mesh, space: &dyn DofMap, n: usize, shape: PartitionShape, spec: OverlapSpec) -> Result<Decomposition> {
    let parts = partition_geometric(mesh, n, shape)?;
    extend_overlap(mesh, space, &parts, n, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::helmholtz::mesh::{build_rect_mesh, refine_uniform, ElementOrder};

    fn square(n: usize) -> Mesh {
        build_rect_mesh(1.0, 1.0, n, n, ElementOrder::P1).unwrap()
    }

    #[test]
    fn single_part() {
        let m = square(4);
        let p = partition_geometric(&m, 1, PartitionShape::Strips).unwrap();
        assert!(p.iter().all(|&x| x == 0));
        let d = extend_overlap(&m, &m, &p, 1, OverlapSpec::default()).unwrap();
        assert_eq!(d.subdomains[0].elements.len(), m.n_elements());
        assert!(d.subdomains[0].weights.iter().all(|&w| w == 1.0));
        assert!(d.subdomains[0].interface.is_empty());
    }

    #[test]
    fn strip_and_grid_counts() {
        let m = square(4);
        let p = partition_geometric(&m, 2, PartitionShape::Strips).unwrap();
        assert_eq!(p.iter().filter(|&&x| x == 0).count(), 16);
        let g = partition_geometric(&m, 4, PartitionShape::Grid(2, 2)).unwrap();
        for j in 0..4 {
            assert_eq!(g.iter().filter(|&&x| x == j).count(), 8);
        }
        assert!(partition_geometric(&m, 33, PartitionShape::Strips).is_err());
    }

    fn x_extent(m: &Mesh, s: &Subdomain) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &e in &s.elements {
            for p in m.coords(e) {
                lo = lo.min(p[0]);
                hi = hi.max(p[0]);
            }
        }
        (lo, hi)
    }

    #[test]
    fn one_layer_adds_one_column() {
        let m = square(8);
        let d = decompose(&m, &m, 2, PartitionShape::Strips, OverlapSpec::default()).unwrap();
        let (lo0, hi0) = x_extent(&m, &d.subdomains[0]);
        let (lo1, hi1) = x_extent(&m, &d.subdomains[1]);
        assert!((lo0 - 0.0).abs() < 1e-14 && (hi0 - 0.625).abs() < 1e-14);
        assert!((lo1 - 0.375).abs() < 1e-14 && (hi1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coarse_overlap_scales_with_coarse_h() {
        let coarse = square(4);
        let fine = refine_uniform(&coarse, 2).unwrap();
        let spec = OverlapSpec { mode: OverlapMode::Coarse, layers: 1 };
        let d = decompose(&fine, &fine, 2, PartitionShape::Strips, spec).unwrap();
        let (_, hi0) = x_extent(&fine, &d.subdomains[0]);
        let h_fine = 1.0 / 16.0;
        assert!(((hi0 - 0.5) - 4.0 * h_fine).abs() < 1e-14);
        let min = decompose(&fine, &fine, 2, PartitionShape::Strips, OverlapSpec::default()).unwrap();
        let (_, hm) = x_extent(&fine, &min.subdomains[0]);
        assert!(((hm - 0.5) - h_fine).abs() < 1e-14);
    }

    #[test]
    fn unity_and_multiplicity() {
        let m = square(6).with_order(ElementOrder::P2);
        let d = decompose(&m, &m, 4, PartitionShape::Grid(2, 2), OverlapSpec { mode: OverlapMode::Minimum, layers: 2 }).unwrap();
        assert!(d.pou_defect() <= 1e-14);
        let mult = d.multiplicity();
        for s in &d.subdomains {
            for (&g, &w) in s.dofs.iter().zip(&s.weights) {
                if mult[g] == 2 {
                    assert_eq!(w, 0.5);
                }
            }
        }
    }

    #[test]
    fn auto_grid_matches_aspect() {
        assert_eq!(grid_for(16, 3.0), (8, 2));
        assert_eq!(grid_for(16, 1.0), (4, 4));
        assert_eq!(grid_for(7, 1.0), (7, 1));
    }
}
