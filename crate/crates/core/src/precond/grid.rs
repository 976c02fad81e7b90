use num_complex::Complex64 as C64;

use super::{CoarseBasis, CoarseSpace, Provenance};
use crate::error::{Error, Result};
use crate::helmholtz::fe::shape_values;
use crate::helmholtz::Mesh;
use crate::numkit::{ComplexSparseMatrix, TripletBuilder};

fn same_mesh(a: &Mesh, b: &Mesh) -> bool {
    a.vertices() == b.vertices() && a.triangles() == b.triangles()
}

fn barycentric(p: [f64; 2], t: &[[f64; 2]; 3]) -> [f64; 3] {
    let det = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]);
    let l1 = ((p[0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (p[1] - t[0][1])) / det;
    let l2 = ((t[1][0] - t[0][0]) * (p[1] - t[0][1]) - (p[0] - t[0][0]) * (t[1][1] - t[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Nodal interpolation from the Lagrange space on `coarse` to the one on
/// `fine`, which must have been refined from `coarse`. Exact for nested
/// spaces of the same order.
pub fn interpolation_matrix(coarse: &Mesh, fine: &Mesh) -> Result<ComplexSparseMatrix> {
    if same_mesh(coarse, fine) && coarse.order() == fine.order() {
        return Ok(ComplexSparseMatrix::identity(fine.n_dofs()));
    }
    let anc = fine.ancestry().ok_or_else(|| Error::Mesh("fine mesh was not produced by refinement".into()))?;
    if !same_mesh(&anc.root, coarse) {
        return Err(Error::Mesh("coarse mesh is not the one the fine mesh was refined from".into()));
    }
    let order = coarse.order();
    let coords = fine.dof_coords();
    let mut done = vec![false; fine.n_dofs()];
    let mut tb = TripletBuilder::with_capacity(fine.n_dofs(), coarse.n_dofs(), fine.n_dofs() * order.dofs_per_element());
    let mut phi = [0.0; 6];
    for (e, &r) in anc.root_element.iter().enumerate() {
        let tri = coarse.coords(r);
        let cdofs = coarse.element_dofs(r);
        for g in fine.element_dofs(e) {
            if done[g] {
                continue;
            }
            done[g] = true;
            shape_values(order, barycentric(coords[g], &tri), &mut phi);
            for (k, &c) in cdofs.iter().enumerate() {
                // nested nodes hit basis zeros up to rounding
                if phi[k].abs() > 1e-13 {
                    tb.push(g, c, C64::new(phi[k], 0.0));
                }
            }
        }
    }
    tb.build()
}

/// Coarse grid space: `Z` interpolates the coarse Lagrange space into the
/// fine one. `Z` is kept sparse and not orthonormalized; the correction
/// `Z E⁻¹ Zᴴ` depends only on `range(Z)`.
pub fn build_grid_cs(fine: &Mesh, coarse: &Mesh, a: &ComplexSparseMatrix) -> Result<CoarseSpace> {
    let coarse = coarse.clone().with_order(fine.order());
    let z = interpolation_matrix(&coarse, fine)?;
    CoarseSpace::new(CoarseBasis::Sparse(z), a, Provenance::Grid)
}
