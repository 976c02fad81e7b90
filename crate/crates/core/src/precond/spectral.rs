use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{CoarseBasis, CoarseSpace, EigenSelection, Provenance, SelectionRule};
use crate::dd::{local_operator, Decomposition, HelmholtzLocal, Subdomain};
use crate::error::{Error, Result};
use crate::helmholtz::assembly::OperatorTerms;
use crate::helmholtz::{AssembledSystem, HelmholtzProblem};
use crate::numkit::{dense_generalized_eig, lu_factorize, orthonormalize, ComplexSparseMatrix, EigOptions, EigSelection, EigenPair};

/// Local modes of one subdomain plus build notes.
type LocalModes = (Vec<Vec<C64>>, Vec<String>);

fn eig_rule(sel: &EigenSelection, k_j: f64) -> EigSelection {
    match sel.rule {
        SelectionRule::BelowWavenumber => EigSelection::ReBelow(k_j),
        SelectionRule::Above(t) => EigSelection::ReAbove(t),
        SelectionRule::Deviation(t) => EigSelection::FarFrom { center: 1.0, radius: t },
        SelectionRule::Largest(m) => EigSelection::LargestRe(m),
    }
}

fn solve_local(a: &Mat<C64>, b: &Mat<C64>, sel: &EigenSelection, k_j: f64, j: usize) -> Result<Vec<EigenPair>> {
    // at k_j = 0 the rounding-level constant mode must not slip in
    if sel.cap == 0 || (sel.rule == SelectionRule::BelowWavenumber && k_j <= 0.0) {
        return Ok(Vec::new());
    }
    let opts = EigOptions { cap: Some(sel.cap), ..EigOptions::default() };
    dense_generalized_eig(a, b, eig_rule(sel, k_j), &opts).map_err(|e| match e {
        Error::Eigen { reason, found } => Error::Eigen { reason: format!("subdomain {j}: {reason}"), found },
        other => other,
    })
}

/// `R_jᵀ D_j u` as a global vector.
fn lift(s: &Subdomain, u: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    s.prolong_weighted_add(u, &mut out);
    out
}

fn scale_rows_cols(m: &mut Mat<C64>, d: &[f64]) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m[(i, j)] *= d[i] * d[j];
        }
    }
}

/// Orthonormalizes the lifted modes and forms `E`.
pub(crate) fn assemble_spectral(
    modes: Vec<LocalModes>,
    a: &ComplexSparseMatrix,
    provenance: Provenance,
) -> Result<CoarseSpace> {
    let mut columns = Vec::new();
    let mut warnings = Vec::new();
    for (c, w) in modes {
        columns.extend(c);
        warnings.extend(w);
    }
    let mut cs = if columns.is_empty() {
        CoarseSpace::empty(a.nrows(), provenance)
    } else {
        let z = orthonormalize(&columns);
        drop(columns);
        CoarseSpace::new(CoarseBasis::Dense(z), a, provenance)?
    };
    cs.warnings = warnings;
    Ok(cs)
}

fn check(dec: &Decomposition, locals: &[HelmholtzLocal], a: &ComplexSparseMatrix) -> Result<()> {
    if locals.len() != dec.len() || a.nrows() != dec.n_dofs {
        return Err(Error::Structural("decomposition, local matrices and operator disagree".into()));
    }
    Ok(())
}

/// DtN coarse space: eigenmodes of the interface Schur complement of the
/// Neumann matrix against the interface mass, `S u = λ M_Γ u`, extended
/// harmonically into the subdomain.
pub fn build_dtn_cs(
    dec: &Decomposition,
    locals: &[HelmholtzLocal],
    a: &ComplexSparseMatrix,
    sel: &EigenSelection,
) -> Result<CoarseSpace> {
    check(dec, locals, a)?;
    let modes = dec
        .subdomains
        .par_iter()
        .zip(locals)
        .enumerate()
        .map(|(j, (s, loc))| dtn_modes(j, s, loc, dec.n_dofs, sel))
        .collect::<Result<Vec<_>>>()?;
    assemble_spectral(modes, a, Provenance::Dtn)
}

/// Local DtN eigenpairs as `(λ, u_Γ)` together with the interface and
/// interior index sets and the extension operator `X = A_II⁻¹ A_IΓ`.
pub struct DtnLocal {
    pub pairs: Vec<EigenPair>,
    pub gamma: Vec<usize>,
    pub interior: Vec<usize>,
    pub extension: Mat<C64>,
    pub regularized: bool,
}

pub fn dtn_eigenpairs(j: usize, s: &Subdomain, loc: &HelmholtzLocal, sel: &EigenSelection) -> Result<Option<DtnLocal>> {
    let n = s.len();
    let mut excluded = vec![false; n];
    for &d in &loc.dirichlet_dofs {
        excluded[d] = true;
    }
    let gamma: Vec<usize> = s.interface.iter().copied().filter(|&i| !excluded[i]).collect();
    if gamma.is_empty() {
        return Ok(None);
    }
    let mut is_gamma = vec![false; n];
    for &g in &gamma {
        is_gamma[g] = true;
    }
    let interior: Vec<usize> = (0..n).filter(|&i| !is_gamma[i]).collect();
    let an = &loc.neumann;
    let a_gg = an.submatrix(&gamma, &gamma).to_dense();
    let m_gg = loc.interface_mass.submatrix(&gamma, &gamma).to_dense();
    let mut regularized = false;
    let (s_mat, x) = if interior.is_empty() {
        (a_gg, Mat::zeros(0, gamma.len()))
    } else {
        let a_ii = an.principal_submatrix(&interior);
        let fact = match lu_factorize(&a_ii) {
            Ok(f) => f,
            Err(Error::Singular(_)) => {
                regularized = true;
                let eps = 1e-10 * a_ii.frobenius_norm();
                let shift = ComplexSparseMatrix::identity(interior.len()).scale(C64::new(eps, 0.0));
                lu_factorize(&a_ii.linear_combination(C64::new(1.0, 0.0), &shift, C64::new(1.0, 0.0))?)?
            }
            Err(e) => return Err(e),
        };
        let mut x = an.submatrix(&interior, &gamma).to_dense();
        fact.solve_mat_in_place(&mut x);
        let a_gi = an.submatrix(&gamma, &interior);
        let s_mat = a_gg - a_gi.mul_dense(&x);
        (s_mat, x)
    };
    let pairs = solve_local(&s_mat, &m_gg, sel, loc.k_max, j)?;
    Ok(Some(DtnLocal { pairs, gamma, interior, extension: x, regularized }))
}

fn dtn_modes(j: usize, s: &Subdomain, loc: &HelmholtzLocal, n_global: usize, sel: &EigenSelection) -> Result<LocalModes> {
    let Some(d) = dtn_eigenpairs(j, s, loc, sel)? else {
        return Ok((Vec::new(), vec![format!("subdomain {j}: empty interface, no DtN modes")]));
    };
    let mut notes = Vec::new();
    if d.regularized {
        notes.push(format!("subdomain {j}: interior block singular, shift-regularized"));
    }
    let mut cols = Vec::with_capacity(d.pairs.len());
    for p in &d.pairs {
        let mut v = vec![C64::new(0.0, 0.0); s.len()];
        for (&g, &u) in d.gamma.iter().zip(&p.vector) {
            v[g] = u;
        }
        for (r, &i) in d.interior.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (c, &u) in p.vector.iter().enumerate() {
                acc += d.extension[(r, c)] * u;
            }
            v[i] = -acc;
        }
        cols.push(lift(s, &v, n_global));
    }
    Ok((cols, notes))
}

/// Solves `D_j X_j D_j u = λ B_j u` on every subdomain and lifts the
/// selected modes with `R_jᵀ D_j`.
fn geneo_modes(
    dec: &Decomposition,
    sel: &EigenSelection,
    k: &[f64],
    pencil: impl Fn(usize, &Subdomain) -> Result<(Mat<C64>, Mat<C64>)> + Sync,
) -> Result<Vec<LocalModes>> {
    dec.subdomains
        .par_iter()
        .enumerate()
        .map(|(j, s)| {
            let (mut lhs, rhs) = pencil(j, s)?;
            scale_rows_cols(&mut lhs, &s.weights);
            let pairs = solve_local(&lhs, &rhs, sel, k[j], j)?;
            Ok((pairs.iter().map(|p| lift(s, &p.vector, dec.n_dofs)).collect(), Vec::new()))
        })
        .collect()
}

/// H-GenEO: `D_j L_j D_j u = λ Ã_j u` with `L_j = R_j L R_jᵀ` the Laplacian
/// part and `Ã_j` the Helmholtz Neumann matrix.
pub fn build_hgeneo_cs(
    dec: &Decomposition,
    locals: &[HelmholtzLocal],
    sys: &AssembledSystem,
    sel: &EigenSelection,
) -> Result<CoarseSpace> {
    check(dec, locals, &sys.a)?;
    let k: Vec<f64> = locals.iter().map(|l| l.k_max).collect();
    let modes = geneo_modes(dec, sel, &k, |j, s| {
        Ok((sys.laplacian.principal_submatrix(&s.dofs).to_dense(), locals[j].neumann.to_dense()))
    })?;
    assemble_spectral(modes, &sys.a, Provenance::HGeneo)
}

/// Δ-GenEO: GenEO for the nearby positive operator `−Δ + k²`,
/// `D_j R_j(K+W)R_jᵀ D_j u = λ Ã⁺_j u`, with `Ã⁺_j` its Neumann matrix.
pub fn build_deltageneo_cs(
    dec: &Decomposition,
    problem: &HelmholtzProblem,
    sys: &AssembledSystem,
    sel: &EigenSelection,
) -> Result<CoarseSpace> {
    if sys.a.nrows() != dec.n_dofs {
        return Err(Error::Structural("decomposition and operator disagree".into()));
    }
    let positive = sys.laplacian.linear_combination(C64::new(1.0, 0.0), &sys.weighted_mass, C64::new(1.0, 0.0))?;
    let k = vec![problem.max_wavenumber(); dec.len()];
    let modes = geneo_modes(dec, sel, &k, |j, s| {
        let local_of = s.local_index(dec.n_dofs);
        let neumann = local_operator(problem, dec, j, OperatorTerms::POSITIVE, &local_of)?;
        Ok((positive.principal_submatrix(&s.dofs).to_dense(), neumann.to_dense()))
    })?;
    assemble_spectral(modes, &sys.a, Provenance::DeltaGeneo)
}
