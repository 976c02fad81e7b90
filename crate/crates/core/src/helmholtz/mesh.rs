//! Structured triangulations of rectangles and their uniform refinements.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Sentinel for "no neighbour" in adjacency tables.
pub const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ElementOrder {
    P1,
    P2,
}

impl ElementOrder {
    pub fn degree(self) -> usize {
        match self {
            ElementOrder::P1 => 1,
            ElementOrder::P2 => 2,
        }
    }

    pub fn from_degree(p: usize) -> Result<Self> {
        match p {
            1 => Ok(ElementOrder::P1),
            2 => Ok(ElementOrder::P2),
            _ => Err(Error::Config(format!("unsupported element order {p} (1 or 2)"))),
        }
    }

    pub fn dofs_per_element(self) -> usize {
        match self {
            ElementOrder::P1 => 3,
            ElementOrder::P2 => 6,
        }
    }
}

/// Side of the bounding rectangle a boundary edge lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Bottom,
    Right,
    Top,
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub edge: usize,
    /// The single triangle adjacent to the edge.
    pub element: usize,
    pub tag: BoundaryTag,
}

/// Link from a refined mesh back to the mesh it was refined from.
#[derive(Debug, Clone)]
pub struct Ancestry {
    pub root: Arc<Mesh>,
    /// Root triangle containing each fine triangle.
    pub root_element: Vec<usize>,
    pub levels: usize,
}

/// Triangle mesh of the rectangle `[x0, x0+width] × [y0, y0+height]` (km).
///
/// Local edge `k` of a triangle joins local vertices `k` and `(k+1) % 3`.
/// Edges are stored with their endpoints sorted, so the global orientation is
/// from the lower to the higher vertex index.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    edge_elements: Vec<[usize; 2]>,
    boundary: Vec<BoundaryEdge>,
    order: ElementOrder,
    origin: [f64; 2],
    extent: [f64; 2],
    ancestry: Option<Ancestry>,
}

impl Mesh {
    /// Builds a mesh from raw vertices and triangles, deriving edges and
    /// boundary tags. Every triangle must be counter-clockwise.
    pub fn from_parts(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, order: ElementOrder) -> Result<Self> {
        if vertices.is_empty() || triangles.is_empty() {
            return Err(Error::Mesh("empty mesh".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Mesh(format!("triangle {t} references a missing vertex")));
            }
            if signed_area(&vertices, tri) <= 0.0 {
                return Err(Error::Mesh(format!("triangle {t} has non-positive area")));
            }
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let mut index: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 3 / 2 + 8);
        let mut edges = Vec::new();
        let mut edge_elements: Vec<[usize; 2]> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_elements.push([NONE, NONE]);
                    edges.len() - 1
                });
                let slot = &mut edge_elements[id];
                if slot[0] == NONE {
                    slot[0] = t;
                } else if slot[1] == NONE {
                    slot[1] = t;
                } else {
                    return Err(Error::Mesh(format!("edge {key:?} shared by more than two triangles")));
                }
                te[k] = id;
            }
            tri_edges.push(te);
        }
        let extent = [hi[0] - lo[0], hi[1] - lo[1]];
        let tol = 1e-10 * extent[0].max(extent[1]);
        let mut boundary = Vec::new();
        for (e, adj) in edge_elements.iter().enumerate() {
            if adj[1] != NONE {
                continue;
            }
            let [a, b] = edges[e];
            let (pa, pb) = (vertices[a], vertices[b]);
            let on = |d: usize, val: f64| (pa[d] - val).abs() < tol && (pb[d] - val).abs() < tol;
            let tag = if on(1, lo[1]) {
                BoundaryTag::Bottom
            } else if on(0, hi[0]) {
                BoundaryTag::Right
            } else if on(1, hi[1]) {
                BoundaryTag::Top
            } else if on(0, lo[0]) {
                BoundaryTag::Left
            } else {
                return Err(Error::Mesh(format!("boundary edge {e} not on the bounding rectangle")));
            };
            boundary.push(BoundaryEdge { edge: e, element: adj[0], tag });
        }
        Ok(Self { vertices, triangles, edges, tri_edges, edge_elements, boundary, order, origin: lo, extent, ancestry: None })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Global edge ids of each triangle's local edges.
    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.tri_edges
    }

    /// The (at most two) triangles adjacent to each edge, [`NONE`] padded.
    pub fn edge_elements(&self) -> &[[usize; 2]] {
        &self.edge_elements
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn order(&self) -> ElementOrder {
        self.order
    }

    pub fn with_order(mut self, order: ElementOrder) -> Self {
        self.order = order;
        self
    }

    pub fn ancestry(&self) -> Option<&Ancestry> {
        self.ancestry.as_ref()
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn width(&self) -> f64 {
        self.extent[0]
    }

    pub fn height(&self) -> f64 {
        self.extent[1]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_dofs(&self) -> usize {
        match self.order {
            ElementOrder::P1 => self.vertices.len(),
            ElementOrder::P2 => self.vertices.len() + self.edges.len(),
        }
    }

    /// Global DOFs of element `e`: vertices, then (P2) the midpoints of local
    /// edges 0, 1, 2.
    pub fn element_dofs(&self, e: usize) -> Vec<usize> {
        let t = self.triangles[e];
        match self.order {
            ElementOrder::P1 => t.to_vec(),
            ElementOrder::P2 => {
                let nv = self.vertices.len();
                let te = self.tri_edges[e];
                vec![t[0], t[1], t[2], nv + te[0], nv + te[1], nv + te[2]]
            }
        }
    }

    /// Coordinates of every DOF (vertices, then edge midpoints for P2).
    pub fn dof_coords(&self) -> Vec<[f64; 2]> {
        let mut out = self.vertices.clone();
        if self.order == ElementOrder::P2 {
            out.extend(self.edges.iter().map(|&[a, b]| self.midpoint(a, b)));
        }
        out
    }

    /// DOFs lying on the outer boundary.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        let nv = self.vertices.len();
        let mut mark = vec![false; self.n_dofs()];
        for be in &self.boundary {
            let [a, b] = self.edges[be.edge];
            mark[a] = true;
            mark[b] = true;
            if self.order == ElementOrder::P2 {
                mark[nv + be.edge] = true;
            }
        }
        (0..mark.len()).filter(|&d| mark[d]).collect()
    }

    fn midpoint(&self, a: usize, b: usize) -> [f64; 2] {
        let (p, q) = (self.vertices[a], self.vertices[b]);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e];
        self.midpoint(a, b)
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        let (p, q) = (self.vertices[a], self.vertices[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }

    pub fn max_edge_length(&self) -> f64 {
        (0..self.edges.len()).map(|e| self.edge_length(e)).fold(0.0, f64::max)
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let t = self.triangles[e];
        let mut c = [0.0; 2];
        for &v in &t {
            c[0] += self.vertices[v][0] / 3.0;
            c[1] += self.vertices[v][1] / 3.0;
        }
        c
    }

    pub fn area(&self, e: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[e])
    }

    pub fn coords(&self, e: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[e];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Triangles sharing at least one vertex with each vertex.
    pub fn vertex_elements(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v].push(t);
            }
        }
        out
    }
}

fn signed_area(vertices: &[[f64; 2]], tri: &[usize; 3]) -> f64 {
    let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Structured mesh of `[0,width]×[0,height]` with `nx × ny` cells, each cut
/// along the diagonal from its lower-left to upper-right corner.
///
/// Vertex `(i, j)` has index `j*(nx+1) + i`.
pub fn build_rect_mesh(width: f64, height: f64, nx: usize, ny: usize, order: ElementOrder) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::Mesh("nx and ny must be >= 1".into()));
    }
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::Mesh("width and height must be positive".into()));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Mesh::from_parts(vertices, triangles, order)
}

/// Splits every triangle into four, `levels` times. Parent vertices keep
/// their indices; the midpoint of parent edge `e` becomes vertex `nv + e`.
pub fn refine_uniform(mesh: &Mesh, levels: usize) -> Result<Mesh> {
    if levels == 0 {
        return Err(Error::Mesh("refine_uniform needs levels >= 1".into()));
    }
    let (root, mut root_element, base_levels) = match &mesh.ancestry {
        Some(a) => (a.root.clone(), a.root_element.clone(), a.levels),
        None => {
            let mut plain = mesh.clone();
            plain.ancestry = None;
            (Arc::new(plain), (0..mesh.n_elements()).collect(), 0)
        }
    };
    let mut cur = mesh.clone();
    for _ in 0..levels {
        let nv = cur.vertices.len();
        let mut vertices = cur.vertices.clone();
        vertices.extend(cur.edges.iter().map(|&[a, b]| cur.midpoint(a, b)));
        let mut triangles = Vec::with_capacity(4 * cur.triangles.len());
        let mut parents = Vec::with_capacity(4 * cur.triangles.len());
        for (t, tri) in cur.triangles.iter().enumerate() {
            let [a, b, c] = *tri;
            let te = cur.tri_edges[t];
            let (mab, mbc, mca) = (nv + te[0], nv + te[1], nv + te[2]);
            triangles.extend_from_slice(&[[a, mab, mca], [mab, b, mbc], [mca, mbc, c], [mab, mbc, mca]]);
            parents.extend_from_slice(&[root_element[t]; 4]);
        }
        root_element = parents;
        cur = Mesh::from_parts(vertices, triangles, mesh.order)?;
    }
    cur.ancestry = Some(Ancestry { root, root_element, levels: base_levels + levels });
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cell_counts() {
        let m = build_rect_mesh(1.0, 1.0, 1, 1, ElementOrder::P1).unwrap();
        assert_eq!((m.n_vertices(), m.n_elements(), m.n_dofs()), (4, 2, 4));
        assert_eq!(m.boundary_edges().len(), 4);
    }

    #[test]
    fn two_by_two_counts() {
        let m = build_rect_mesh(1.0, 1.0, 2, 2, ElementOrder::P1).unwrap();
        assert_eq!((m.n_vertices(), m.n_elements()), (9, 8));
        let m2 = m.with_order(ElementOrder::P2);
        // Euler for a disk: V − E + F = 1
        assert_eq!(m2.n_vertices() + m2.n_elements(), m2.n_edges() + 1);
        assert_eq!(m2.n_dofs(), 25);
    }

    #[test]
    fn refinement_nests_and_halves() {
        let m = build_rect_mesh(1.0, 1.0, 1, 1, ElementOrder::P1).unwrap();
        let r = refine_uniform(&m, 1).unwrap();
        assert_eq!(r.n_elements(), 8);
        for (i, v) in m.vertices().iter().enumerate() {
            assert_eq!(r.vertices()[i], *v);
        }
        assert!((r.max_edge_length() - m.max_edge_length() / 2.0).abs() < 1e-14);
        assert_eq!(r.ancestry().unwrap().levels, 1);
        let rr = refine_uniform(&r, 1).unwrap();
        assert_eq!(rr.ancestry().unwrap().levels, 2);
        assert_eq!(rr.ancestry().unwrap().root.n_elements(), 2);
    }

    #[test]
    fn refined_children_lie_in_their_root() {
        let m = build_rect_mesh(2.0, 1.0, 3, 2, ElementOrder::P2).unwrap();
        let r = refine_uniform(&m, 2).unwrap();
        let anc = r.ancestry().unwrap();
        for e in 0..r.n_elements() {
            let c = r.centroid(e);
            let [a, b, d] = anc.root.coords(anc.root_element[e]);
            let area = |p: [f64; 2], q: [f64; 2], s: [f64; 2]| 0.5 * ((q[0] - p[0]) * (s[1] - p[1]) - (s[0] - p[0]) * (q[1] - p[1]));
            assert!(area(a, b, c) > 0.0 && area(b, d, c) > 0.0 && area(d, a, c) > 0.0);
        }
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let e = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0, 1, 2]], ElementOrder::P1);
        assert!(matches!(e, Err(Error::Mesh(_))));
    }

    #[test]
    fn boundary_dofs_p2() {
        let m = build_rect_mesh(1.0, 1.0, 2, 2, ElementOrder::P2).unwrap();
        // 8 boundary vertices + 8 boundary edge midpoints
        assert_eq!(m.boundary_dofs().len(), 16);
    }
}
