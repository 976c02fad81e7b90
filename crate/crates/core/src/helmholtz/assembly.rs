//! Assembly of `A = L − W + iΓ` for `−Δu − k²u = f` with an impedance
//! condition `∂ₙu + iku = 0` (or homogeneous Dirichlet) on the outer boundary.
//!
//! The wavenumber is sampled once per element at the centroid, so every
//! element integral is exact for the piecewise-constant coefficient.

use num_complex::Complex64 as C64;

use super::fe::{edge_mass, element_matrices, shape_values, QUAD6};
use super::mesh::{ElementOrder, Mesh};
use super::velocity::VelocityModel;
use crate::error::{Error, Result};
use crate::numkit::{ComplexSparseMatrix, TripletBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OuterBc {
    Impedance,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    /// Unit load at the DOF nearest to `(x, y)`.
    Point { x: f64, y: f64, amplitude: C64 },
    /// `amplitude · exp(−|p − p₀|²/width²)` integrated against the basis.
    Gaussian { x: f64, y: f64, width: f64, amplitude: C64 },
}

#[derive(Debug, Clone)]
pub struct HelmholtzProblem {
    pub mesh: Mesh,
    pub model: VelocityModel,
    /// Angular frequency in rad/s.
    pub omega: f64,
    pub source: Source,
    pub outer_bc: OuterBc,
}

impl HelmholtzProblem {
    pub fn new(mesh: Mesh, model: VelocityModel, omega: f64, source: Source, outer_bc: OuterBc) -> Result<Self> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::Config(format!("omega must be finite and >= 0, got {omega}")));
        }
        model.validate()?;
        let (Source::Point { x, y, .. } | Source::Gaussian { x, y, .. }) = source;
        let [x0, y0] = mesh.origin();
        let inside = x >= x0 && x <= x0 + mesh.width() && y >= y0 && y <= y0 + mesh.height();
        if !inside {
            return Err(Error::Config(format!("source ({x}, {y}) outside the domain")));
        }
        Ok(Self { mesh, model, omega, source, outer_bc })
    }

    fn speed_at(&self, p: [f64; 2]) -> f64 {
        let [x0, y0] = self.mesh.origin();
        self.model.speed(p[0] - x0, p[1] - y0)
    }

    /// `ω/c` at the centroid of element `e`.
    pub fn element_wavenumber(&self, e: usize) -> f64 {
        self.omega / self.speed_at(self.mesh.centroid(e))
    }

    /// `ω/c` at the midpoint of edge `e`.
    pub fn edge_wavenumber(&self, e: usize) -> f64 {
        self.omega / self.speed_at(self.mesh.edge_midpoint(e))
    }

    /// Max wavenumber over the continuous model.
    pub fn max_wavenumber(&self) -> f64 {
        self.omega / self.model.min_speed()
    }
}

/// Which terms to assemble and with what weights:
/// `stiffness·K + mass·(k²M) + i·impedance·Γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorTerms {
    pub stiffness: f64,
    pub mass: f64,
    pub impedance: f64,
}

impl OperatorTerms {
    /// `L − W + iΓ`.
    pub const HELMHOLTZ: Self = Self { stiffness: 1.0, mass: -1.0, impedance: 1.0 };
    /// `L + W`, the nearby positive operator.
    pub const POSITIVE: Self = Self { stiffness: 1.0, mass: 1.0, impedance: 0.0 };
    pub const LAPLACIAN: Self = Self { stiffness: 1.0, mass: 0.0, impedance: 0.0 };
}

/// Restriction of an assembly to a set of elements with a local numbering.
pub struct LocalView<'a> {
    pub elements: &'a [usize],
    /// Global DOF → local DOF, `usize::MAX` outside the view.
    pub local_of: &'a [usize],
    pub n_local: usize,
}

/// Assembles `terms` over `view` (or the whole mesh). Impedance contributions
/// come from outer boundary edges whose adjacent element is in the view.
pub fn assemble_operator(problem: &HelmholtzProblem, terms: OperatorTerms, view: Option<&LocalView<'_>>) -> Result<ComplexSparseMatrix> {
    let mesh = &problem.mesh;
    let order = mesh.order();
    let (n, all): (usize, Vec<usize>);
    let elements: &[usize] = match view {
        Some(v) => {
            n = v.n_local;
            v.elements
        }
        None => {
            n = mesh.n_dofs();
            all = (0..mesh.n_elements()).collect();
            &all
        }
    };
    let map = |g: usize| -> usize {
        match view {
            Some(v) => v.local_of[g],
            None => g,
        }
    };
    let nloc = order.dofs_per_element();
    let mut b = TripletBuilder::with_capacity(n, n, elements.len() * nloc * nloc);
    let mut in_view = vec![view.is_none(); if view.is_some() { mesh.n_elements() } else { 0 }];
    for &e in elements {
        if view.is_some() {
            in_view[e] = true;
        }
        let em = element_matrices(&mesh.coords(e), order)?;
        let k = problem.element_wavenumber(e);
        let wm = terms.mass * k * k;
        let dofs = mesh.element_dofs(e);
        for i in 0..nloc {
            let gi = map(dofs[i]);
            if gi == usize::MAX {
                continue;
            }
            for j in 0..nloc {
                let gj = map(dofs[j]);
                if gj == usize::MAX {
                    continue;
                }
                let v = terms.stiffness * em.stiffness[i][j] + wm * em.mass[i][j];
                b.push(gi, gj, C64::new(v, 0.0));
            }
        }
    }
    if terms.impedance != 0.0 && problem.outer_bc == OuterBc::Impedance {
        let edges: Vec<usize> = mesh
            .boundary_edges()
            .iter()
            .filter(|be| view.is_none() || in_view[be.element])
            .map(|be| be.edge)
            .collect();
        push_edge_mass(problem, &edges, |e| C64::new(0.0, terms.impedance * problem.edge_wavenumber(e)), &map, &mut b);
    }
    b.build()
}

/// Global DOFs of an edge in the order used by [`edge_mass`].
pub fn edge_dofs(mesh: &Mesh, e: usize) -> Vec<usize> {
    let [a, b] = mesh.edges()[e];
    match mesh.order() {
        ElementOrder::P1 => vec![a, b],
        ElementOrder::P2 => vec![a, b, mesh.n_vertices() + e],
    }
}

fn push_edge_mass(
    problem: &HelmholtzProblem,
    edges: &[usize],
    weight: impl Fn(usize) -> C64,
    map: &dyn Fn(usize) -> usize,
    b: &mut TripletBuilder,
) {
    let mesh = &problem.mesh;
    for &e in edges {
        let (m, n) = edge_mass(mesh.edge_length(e), mesh.order());
        let w = weight(e);
        let dofs = edge_dofs(mesh, e);
        for i in 0..n {
            let gi = map(dofs[i]);
            if gi == usize::MAX {
                continue;
            }
            for j in 0..n {
                let gj = map(dofs[j]);
                if gj != usize::MAX {
                    b.push(gi, gj, w * m[i][j]);
                }
            }
        }
    }
}

/// `Σₑ weight(e)·M_e` over the given mesh edges, in a local or global numbering.
pub fn assemble_edge_mass(
    problem: &HelmholtzProblem,
    edges: &[usize],
    weight: impl Fn(usize) -> C64,
    local_of: Option<&[usize]>,
    n: usize,
) -> Result<ComplexSparseMatrix> {
    let map = |g: usize| local_of.map_or(g, |m| m[g]);
    let mut b = TripletBuilder::new(n, n);
    push_edge_mass(problem, edges, weight, &map, &mut b);
    b.build()
}

/// Load vector `∫ f φᵢ` for a smooth right-hand side.
pub fn load_vector(mesh: &Mesh, f: impl Fn(f64, f64) -> C64) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); mesh.n_dofs()];
    let order = mesh.order();
    let mut phi = [0.0; 6];
    for e in 0..mesh.n_elements() {
        let p = mesh.coords(e);
        let area = mesh.area(e);
        if !(area > 0.0) {
            return Err(Error::Mesh(format!("element {e} has non-positive area")));
        }
        let dofs = mesh.element_dofs(e);
        for (l, w) in QUAD6 {
            let x = l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0];
            let y = l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1];
            let fv = f(x, y) * (w * area);
            shape_values(order, l, &mut phi);
            for (i, &d) in dofs.iter().enumerate() {
                out[d] += fv * phi[i];
            }
        }
    }
    Ok(out)
}

/// Index of the DOF closest to `(x, y)`; ties go to the lowest index.
pub fn nearest_dof(mesh: &Mesh, x: f64, y: f64) -> usize {
    let mut best = (f64::INFINITY, 0usize);
    for (i, p) in mesh.dof_coords().iter().enumerate() {
        let d = (p[0] - x).powi(2) + (p[1] - y).powi(2);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub a: ComplexSparseMatrix,
    pub b: Vec<C64>,
    /// Stiffness `K` (the Laplacian part), real.
    pub laplacian: ComplexSparseMatrix,
    /// `W = ∫k²φᵢφⱼ`, real.
    pub weighted_mass: ComplexSparseMatrix,
    /// `Γ = ∫_{∂Ω} k φᵢφⱼ`, real; zero under Dirichlet conditions.
    pub impedance: ComplexSparseMatrix,
    /// Eliminated DOFs (identity rows in `a` and `laplacian`, zero rows in
    /// `weighted_mass`); empty for impedance conditions.
    pub dirichlet_dofs: Vec<usize>,
}

pub fn assemble_helmholtz(problem: &HelmholtzProblem) -> Result<AssembledSystem> {
    let mesh = &problem.mesh;
    let n = mesh.n_dofs();
    let mut laplacian = assemble_operator(problem, OperatorTerms::LAPLACIAN, None)?;
    let mut weighted_mass = assemble_operator(problem, OperatorTerms { stiffness: 0.0, mass: 1.0, impedance: 0.0 }, None)?;
    let impedance = match problem.outer_bc {
        OuterBc::Impedance => {
            let edges: Vec<usize> = mesh.boundary_edges().iter().map(|be| be.edge).collect();
            assemble_edge_mass(problem, &edges, |e| C64::new(problem.edge_wavenumber(e), 0.0), None, n)?
        }
        OuterBc::Dirichlet => ComplexSparseMatrix::zeros(n, n),
    };
    let one = C64::new(1.0, 0.0);
    let mut a = laplacian.linear_combination(one, &weighted_mass, -one)?;
    a = a.linear_combination(one, &impedance, C64::new(0.0, 1.0))?;

    let mut b = match problem.source {
        Source::Point { x, y, amplitude } => {
            let mut b = vec![C64::new(0.0, 0.0); n];
            b[nearest_dof(mesh, x, y)] = amplitude;
            b
        }
        Source::Gaussian { x, y, width, amplitude } => {
            load_vector(mesh, |px, py| amplitude * (-((px - x).powi(2) + (py - y).powi(2)) / (width * width)).exp())?
        }
    };
    let mut dirichlet_dofs = Vec::new();
    if problem.outer_bc == OuterBc::Dirichlet {
        dirichlet_dofs = mesh.boundary_dofs();
        a = a.with_identity_rows(&dirichlet_dofs);
        laplacian = laplacian.with_identity_rows(&dirichlet_dofs);
        weighted_mass = weighted_mass.with_zero_rows(&dirichlet_dofs);
        for &d in &dirichlet_dofs {
            b[d] = C64::new(0.0, 0.0);
        }
    }
    Ok(AssembledSystem { a, b, laplacian, weighted_mass, impedance, dirichlet_dofs })
}
