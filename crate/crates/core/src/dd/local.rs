//! Subdomain matrices for the Helmholtz operator.

use num_complex::Complex64 as C64;

use super::Decomposition;
use crate::error::{Error, Result};
use crate::helmholtz::assembly::{assemble_edge_mass, assemble_operator, LocalView, OperatorTerms};
use crate::helmholtz::{HelmholtzProblem, OuterBc};
use crate::numkit::ComplexSparseMatrix;

/// Local operators of one subdomain, in its local DOF numbering.
#[derive(Debug, Clone)]
pub struct HelmholtzLocal {
    /// `A_j = R_j A R_jᵀ`.
    pub dirichlet: ComplexSparseMatrix,
    /// `Ã_j`: the operator re-assembled from the subdomain's elements only,
    /// natural conditions on the interface, outer conditions kept.
    pub neumann: ComplexSparseMatrix,
    /// `B_j = Ã_j + i k M_Γ` on interface edges, `k` sampled per edge.
    pub robin: ComplexSparseMatrix,
    /// Unweighted interface mass `M_Γ`.
    pub interface_mass: ComplexSparseMatrix,
    /// `max ω/c` over the subdomain elements.
    pub k_max: f64,
    /// Local indices carrying outer Dirichlet conditions.
    pub dirichlet_dofs: Vec<usize>,
}

fn local_dirichlet(problem: &HelmholtzProblem, local_of: &[usize]) -> Vec<usize> {
    if problem.outer_bc != OuterBc::Dirichlet {
        return Vec::new();
    }
    let mut out: Vec<usize> = problem.mesh.boundary_dofs().into_iter().map(|g| local_of[g]).filter(|&l| l != usize::MAX).collect();
    out.sort_unstable();
    out
}

/// Assembles `terms` on subdomain `j` with natural interface conditions.
pub(crate) fn local_operator(
    problem: &HelmholtzProblem,
    dec: &Decomposition,
    j: usize,
    terms: OperatorTerms,
    local_of: &[usize],
) -> Result<ComplexSparseMatrix> {
    let s = &dec.subdomains[j];
    let view = LocalView { elements: &s.elements, local_of, n_local: s.len() };
    let m = assemble_operator(problem, terms, Some(&view))?;
    let dd = local_dirichlet(problem, local_of);
    Ok(if dd.is_empty() { m } else { m.with_identity_rows(&dd) })
}

pub fn assemble_local_matrices(dec: &Decomposition, problem: &HelmholtzProblem, a: &ComplexSparseMatrix) -> Result<Vec<HelmholtzLocal>> {
    if a.nrows() != dec.n_dofs || problem.mesh.n_dofs() != dec.n_dofs {
        return Err(Error::Structural("decomposition, problem and matrix sizes differ".into()));
    }
    dec.subdomains
        .iter()
        .enumerate()
        .map(|(j, s)| {
            if s.is_empty() {
                return Err(Error::Config(format!("subdomain {j} is empty")));
            }
            let local_of = s.local_index(dec.n_dofs);
            let dirichlet = a.principal_submatrix(&s.dofs);
            let neumann = local_operator(problem, dec, j, OperatorTerms::HELMHOLTZ, &local_of)?;
            let n = s.len();
            let interface_mass = assemble_edge_mass(problem, &s.interface_edges, |_| C64::new(1.0, 0.0), Some(&local_of), n)?;
            let robin_term =
                assemble_edge_mass(problem, &s.interface_edges, |e| C64::new(0.0, problem.edge_wavenumber(e)), Some(&local_of), n)?;
            let dd = local_dirichlet(problem, &local_of);
            let robin_term = if dd.is_empty() { robin_term } else { robin_term.with_zero_rows(&dd) };
            let robin = neumann.linear_combination(C64::new(1.0, 0.0), &robin_term, C64::new(1.0, 0.0))?;
            let k_max = s.elements.iter().map(|&e| problem.element_wavenumber(e)).fold(0.0, f64::max);
            Ok(HelmholtzLocal { dirichlet, neumann, robin, interface_mass, k_max, dirichlet_dofs: dd })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::{decompose, OverlapSpec, PartitionShape};
    use crate::helmholtz::{assemble_helmholtz, build_rect_mesh, ElementOrder, Source, VelocityModel};

    fn problem(omega: f64, bc: OuterBc) -> HelmholtzProblem {
        let mesh = build_rect_mesh(1.0, 1.0, 6, 6, ElementOrder::P2).unwrap();
        let src = Source::Point { x: 0.5, y: 0.5, amplitude: C64::new(1.0, 0.0) };
        HelmholtzProblem::new(mesh, VelocityModel::Constant(1.0), omega, src, bc).unwrap()
    }

    #[test]
    fn single_domain_robin_is_global() {
        let p = problem(7.0, OuterBc::Impedance);
        let sys = assemble_helmholtz(&p).unwrap();
        let d = decompose(&p.mesh, &p.mesh, 1, PartitionShape::Strips, OverlapSpec::default()).unwrap();
        let loc = assemble_local_matrices(&d, &p, &sys.a).unwrap();
        let diff = loc[0].robin.linear_combination(C64::new(1.0, 0.0), &sys.a, C64::new(-1.0, 0.0)).unwrap();
        assert!(diff.max_abs() <= 1e-12 * sys.a.max_abs());
    }

    #[test]
    fn robin_differs_only_on_interface() {
        let p = problem(7.0, OuterBc::Impedance);
        let sys = assemble_helmholtz(&p).unwrap();
        let d = decompose(&p.mesh, &p.mesh, 4, PartitionShape::Grid(2, 2), OverlapSpec::default()).unwrap();
        let loc = assemble_local_matrices(&d, &p, &sys.a).unwrap();
        for (s, l) in d.subdomains.iter().zip(&loc) {
            assert!(l.neumann.is_symmetric(1e-13));
            let diff = l.robin.linear_combination(C64::new(1.0, 0.0), &l.neumann, C64::new(-1.0, 0.0)).unwrap();
            let mut on_iface = vec![false; s.len()];
            for &i in &s.interface {
                on_iface[i] = true;
            }
            for r in 0..diff.nrows() {
                let (cols, vals) = diff.row(r);
                for (&c, v) in cols.iter().zip(vals) {
                    if v.norm() > 0.0 {
                        assert!(on_iface[r] && on_iface[c]);
                    }
                }
            }
            assert!(l.k_max == 7.0);
        }
    }

    #[test]
    fn poisson_neumann_has_constant_kernel() {
        let p = problem(0.0, OuterBc::Impedance);
        let sys = assemble_helmholtz(&p).unwrap();
        let d = decompose(&p.mesh, &p.mesh, 9, PartitionShape::Grid(3, 3), OverlapSpec::default()).unwrap();
        let loc = assemble_local_matrices(&d, &p, &sys.a).unwrap();
        // the centre subdomain touches no outer boundary
        let centre = &loc[4].neumann;
        let ones = vec![C64::new(1.0, 0.0); centre.nrows()];
        let r = centre.mul_vec(&ones);
        assert!(r.iter().all(|v| v.norm() < 1e-12));
        let sv = centre.to_dense().singular_values().unwrap();
        assert!(sv.iter().copied().fold(f64::INFINITY, f64::min) < 1e-10);
    }
}
