//! The positive curl–curl problem `∇×(μ_r⁻¹∇×u) + α ε_r u = f` on
//! triangles with lowest-order Whitney edge elements, and its
//! preconditioners.
//!
//! DOFs are tangential circulations along interior edges, each edge directed
//! from its lower to its higher vertex index; boundary edges carry the
//! condition `u×n = 0`. In 2D the curl of a Whitney field is a constant per
//! triangle, `curl(λ_a∇λ_b − λ_b∇λ_a) = 2 ∇λ_a × ∇λ_b`.

mod precond;

pub use precond::{
    build_free_cs, build_geneo_complement_cs, fsl_bounds_check, local_near_kernel, Asp, FslCheck, GeneoComplement, OneLevelAs,
};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dd::DofMap;
use crate::error::{Error, Result};
use crate::helmholtz::fe::{barycentric_gradients, EDGE_VERTS};
use crate::helmholtz::mesh::{Mesh, NONE};
use crate::numkit::{ComplexSparseMatrix, TripletBuilder};

#[derive(Debug, Clone)]
pub struct MaxwellProblem {
    pub mesh: Mesh,
    /// Per element.
    pub mu_r: Vec<f64>,
    /// Per element.
    pub eps_r: Vec<f64>,
    pub alpha: f64,
}

impl MaxwellProblem {
    pub fn new(mesh: Mesh, mu_r: Vec<f64>, eps_r: Vec<f64>, alpha: f64) -> Result<Self> {
        let ne = mesh.n_elements();
        if mu_r.len() != ne || eps_r.len() != ne {
            return Err(Error::Config(format!("coefficient fields need {ne} entries")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if mu_r.iter().chain(&eps_r).any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config("mu_r and eps_r must be positive".into()));
        }
        Ok(Self { mesh, mu_r, eps_r, alpha })
    }

    /// Unit `μ_r`, and `ε_r` sampled from `eps(x, y)` at element centroids.
    pub fn with_permittivity(mesh: Mesh, alpha: f64, eps: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let eps_r = (0..mesh.n_elements()).map(|e| {
            let [x, y] = mesh.centroid(e);
            eps(x, y)
        });
        let eps_r = eps_r.collect();
        Self::new(mesh.clone(), vec![1.0; mesh.n_elements()], eps_r, alpha)
    }
}

/// Three horizontal channels `ε_r = contrast` (at heights 1/4, 1/2, 3/4 of
/// the domain, each 1/16 thick) in a unit background. The channels stop 1/8
/// of the width short of the sides so they float free of the boundary.
pub fn channel_permittivity(width: f64, height: f64, contrast: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, y| {
        let (s, t) = (x / width, y / height);
        let inside = (0.125..=0.875).contains(&s) && [0.25, 0.5, 0.75].iter().any(|c| (t - c).abs() < 1.0 / 32.0);
        if inside {
            contrast
        } else {
            1.0
        }
    }
}

/// Interior edges and vertices of a mesh, numbered consecutively.
#[derive(Debug, Clone)]
pub struct EdgeSpace {
    /// DOF of each mesh edge, `NONE` on the boundary.
    pub dof_of_edge: Vec<usize>,
    pub edge_of_dof: Vec<usize>,
    /// Nodal index of each vertex, `NONE` on the boundary.
    pub node_of_vertex: Vec<usize>,
    pub vertex_of_node: Vec<usize>,
    triangle_edges: Vec<[usize; 3]>,
}

impl EdgeSpace {
    pub fn new(mesh: &Mesh) -> Self {
        let mut boundary_edge = vec![false; mesh.n_edges()];
        let mut boundary_vertex = vec![false; mesh.n_vertices()];
        for be in mesh.boundary_edges() {
            boundary_edge[be.edge] = true;
            for v in mesh.edges()[be.edge] {
                boundary_vertex[v] = true;
            }
        }
        let number = |flags: &[bool]| {
            let mut of = vec![NONE; flags.len()];
            let mut back = Vec::new();
            for (i, &b) in flags.iter().enumerate() {
                if !b {
                    of[i] = back.len();
                    back.push(i);
                }
            }
            (of, back)
        };
        let (dof_of_edge, edge_of_dof) = number(&boundary_edge);
        let (node_of_vertex, vertex_of_node) = number(&boundary_vertex);
        Self { dof_of_edge, edge_of_dof, node_of_vertex, vertex_of_node, triangle_edges: mesh.triangle_edges().to_vec() }
    }

    pub fn n_edges(&self) -> usize {
        self.edge_of_dof.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.vertex_of_node.len()
    }

    /// Interior-node DOFs of element `e`.
    pub fn element_nodes(&self, tri: &[usize; 3]) -> Vec<usize> {
        tri.iter().map(|&v| self.node_of_vertex[v]).filter(|&n| n != NONE).collect()
    }
}

impl DofMap for EdgeSpace {
    fn n_dofs(&self) -> usize {
        self.n_edges()
    }
    fn element_dofs(&self, e: usize) -> Vec<usize> {
        self.triangle_edges[e].iter().map(|&g| self.dof_of_edge[g]).filter(|&d| d != NONE).collect()
    }
}

/// Whitney element data: per local edge the DOF (or `NONE`), the curl, and
/// the oriented local vertex pair `(tail, head)`.
struct WhitneyElement {
    area: f64,
    grads: [[f64; 2]; 3],
    dofs: [usize; 3],
    curl: [f64; 3],
    ends: [[usize; 2]; 3],
}

fn whitney(mesh: &Mesh, space: &EdgeSpace, e: usize) -> Result<WhitneyElement> {
    let tri = mesh.triangles()[e];
    let (area, g) = barycentric_gradients(&mesh.coords(e))?;
    let mut out = WhitneyElement { area, grads: g, dofs: [NONE; 3], curl: [0.0; 3], ends: [[0; 2]; 3] };
    for (k, [i, j]) in EDGE_VERTS.iter().enumerate() {
        let (a, b) = if tri[*i] < tri[*j] { (*i, *j) } else { (*j, *i) };
        out.ends[k] = [a, b];
        out.curl[k] = 2.0 * (g[a][0] * g[b][1] - g[a][1] * g[b][0]);
        out.dofs[k] = space.dof_of_edge[mesh.triangle_edges()[e][k]];
    }
    Ok(out)
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `∫ w_k·w_l` on one element, from `∫λ_pλ_q = area(1+δ_pq)/12`.
fn whitney_mass(w: &WhitneyElement, k: usize, l: usize) -> f64 {
    let int = |p: usize, q: usize| w.area * if p == q { 2.0 } else { 1.0 } / 12.0;
    let g = &w.grads;
    let ([a, b], [c, d]) = (w.ends[k], w.ends[l]);
    int(a, c) * dot(g[b], g[d]) - int(a, d) * dot(g[b], g[c]) - int(b, c) * dot(g[a], g[d]) + int(b, d) * dot(g[a], g[c])
}

/// Restriction of an assembly to a set of elements with local numbering.
pub struct EdgeView<'a> {
    pub elements: &'a [usize],
    pub local_of: &'a [usize],
    pub n_local: usize,
}

/// Curl–curl `K = ∫μ⁻¹ curl·curl` and mass `M = ∫ε w·w`, over all elements
/// or only over `view`.
pub fn assemble_edge_operators(
    problem: &MaxwellProblem,
    space: &EdgeSpace,
    view: Option<&EdgeView<'_>>,
) -> Result<(ComplexSparseMatrix, ComplexSparseMatrix)> {
    let mesh = &problem.mesh;
    let all: Vec<usize>;
    let (elements, n) = match view {
        Some(v) => (v.elements, v.n_local),
        None => {
            all = (0..mesh.n_elements()).collect();
            (&all[..], space.n_edges())
        }
    };
    let map = |d: usize| match view {
        Some(v) => v.local_of[d],
        None => d,
    };
    let mut kb = TripletBuilder::with_capacity(n, n, 9 * elements.len());
    let mut mb = TripletBuilder::with_capacity(n, n, 9 * elements.len());
    for &e in elements {
        let w = whitney(mesh, space, e)?;
        let (mu_inv, eps) = (1.0 / problem.mu_r[e], problem.eps_r[e]);
        for k in 0..3 {
            if w.dofs[k] == NONE {
                continue;
            }
            let r = map(w.dofs[k]);
            for l in 0..3 {
                if w.dofs[l] == NONE {
                    continue;
                }
                let c = map(w.dofs[l]);
                kb.push(r, c, C64::new(w.area * mu_inv * w.curl[k] * w.curl[l], 0.0));
                mb.push(r, c, C64::new(eps * whitney_mass(&w, k, l), 0.0));
            }
        }
    }
    Ok((kb.build()?, mb.build()?))
}

/// Assembled Maxwell operators and the auxiliary nodal spaces.
#[derive(Debug, Clone)]
pub struct MaxwellSystem {
    pub space: EdgeSpace,
    /// Curl–curl matrix.
    pub k: ComplexSparseMatrix,
    /// `ε_r`-weighted edge mass.
    pub mass: ComplexSparseMatrix,
    /// `A = K + α M`.
    pub a: ComplexSparseMatrix,
    /// Signed incidence, interior edges × interior nodes: the discrete gradient.
    pub c: ComplexSparseMatrix,
    /// `μ_r⁻¹`-weighted nodal vector Laplacian, DOF `2·node + component`.
    pub ltilde: ComplexSparseMatrix,
    /// `ε_r`-weighted nodal vector mass, same numbering.
    pub qtilde: ComplexSparseMatrix,
    /// Edge interpolation of nodal vector fields.
    pub p: ComplexSparseMatrix,
    /// Unweighted scalar nodal Laplacian on interior nodes.
    pub l: ComplexSparseMatrix,
    pub alpha: f64,
}

pub fn assemble_maxwell(problem: &MaxwellProblem) -> Result<MaxwellSystem> {
    let mesh = &problem.mesh;
    let space = EdgeSpace::new(mesh);
    let (k, mass) = assemble_edge_operators(problem, &space, None)?;
    let one = C64::new(1.0, 0.0);
    let a = k.linear_combination(one, &mass, C64::new(problem.alpha, 0.0))?;

    let (ne, nn) = (space.n_edges(), space.n_nodes());
    let mut cb = TripletBuilder::with_capacity(ne, nn, 2 * ne);
    let mut pb = TripletBuilder::with_capacity(ne, 2 * nn, 4 * ne);
    for (d, &g) in space.edge_of_dof.iter().enumerate() {
        let [tail, head] = mesh.edges()[g];
        let (pt, ph) = (mesh.vertices()[tail], mesh.vertices()[head]);
        let t = [ph[0] - pt[0], ph[1] - pt[1]];
        for (v, sign) in [(tail, -1.0), (head, 1.0)] {
            let node = space.node_of_vertex[v];
            if node == NONE {
                continue;
            }
            cb.push(d, node, C64::new(sign, 0.0));
            pb.push(d, 2 * node, C64::new(0.5 * t[0], 0.0));
            pb.push(d, 2 * node + 1, C64::new(0.5 * t[1], 0.0));
        }
    }
    let mut lb = TripletBuilder::with_capacity(nn, nn, 9 * mesh.n_elements());
    let mut ltb = TripletBuilder::with_capacity(2 * nn, 2 * nn, 18 * mesh.n_elements());
    let mut qb = TripletBuilder::with_capacity(2 * nn, 2 * nn, 18 * mesh.n_elements());
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let (area, g) = barycentric_gradients(&mesh.coords(e))?;
        for i in 0..3 {
            let ni = space.node_of_vertex[tri[i]];
            if ni == NONE {
                continue;
            }
            for j in 0..3 {
                let nj = space.node_of_vertex[tri[j]];
                if nj == NONE {
                    continue;
                }
                let stiff = area * dot(g[i], g[j]);
                let m = area * if i == j { 2.0 } else { 1.0 } / 12.0;
                lb.push(ni, nj, C64::new(stiff, 0.0));
                for comp in 0..2 {
                    ltb.push(2 * ni + comp, 2 * nj + comp, C64::new(stiff / problem.mu_r[e], 0.0));
                    qb.push(2 * ni + comp, 2 * nj + comp, C64::new(m * problem.eps_r[e], 0.0));
                }
            }
        }
    }
    Ok(MaxwellSystem {
        space,
        k,
        mass,
        a,
        c: cb.build()?,
        ltilde: ltb.build()?,
        qtilde: qb.build()?,
        p: pb.build()?,
        l: lb.build()?,
        alpha: problem.alpha,
    })
}

/// Deterministic random load vector on the edge DOFs.
pub fn random_load(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect()
}

#[cfg(test)]
mod tests;
