use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{assemble_edge_operators, EdgeView, MaxwellProblem, MaxwellSystem};
use crate::dd::{Decomposition, Subdomain};
use crate::error::{Error, Result};
use crate::numkit::{
    dense_generalized_eig, lu_factorize, operator_to_dense, orthonormalize, orthonormalize_columns, ComplexSparseMatrix, DenseLu,
    EigOptions, EigSelection, EigenPair, Factorization, LinearOperator,
};
use crate::precond::{CoarseBasis, CoarseSpace, Provenance};

/// Nodal auxiliary space preconditioner
/// `diag(A)⁻¹ + P(L̃ + αQ̃)⁻¹Pᵀ + α⁻¹ C L⁻¹ Cᵀ`.
pub struct Asp {
    diag_inv: Vec<C64>,
    p: ComplexSparseMatrix,
    vector: Factorization,
    c: ComplexSparseMatrix,
    scalar: Factorization,
    alpha_inv: f64,
}

impl Asp {
    pub fn new(sys: &MaxwellSystem) -> Result<Self> {
        let diag_inv = sys.a.diagonal().iter().map(|d| 1.0 / d).collect();
        let vec_op = sys.ltilde.linear_combination(C64::new(1.0, 0.0), &sys.qtilde, C64::new(sys.alpha, 0.0))?;
        Ok(Self {
            diag_inv,
            p: sys.p.clone(),
            vector: lu_factorize(&vec_op)?,
            c: sys.c.clone(),
            scalar: lu_factorize(&sys.l)?,
            alpha_inv: 1.0 / sys.alpha,
        })
    }
}

impl LinearOperator for Asp {
    fn dim(&self) -> usize {
        self.diag_inv.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diag_inv) {
            *yi = xi * d;
        }
        let mut v = self.p.mul_vec_transpose(x);
        self.vector.solve_in_place(&mut v);
        for (yi, t) in y.iter_mut().zip(self.p.mul_vec(&v)) {
            *yi += t;
        }
        let mut s = self.c.mul_vec_transpose(x);
        self.scalar.solve_in_place(&mut s);
        for (yi, t) in y.iter_mut().zip(self.c.mul_vec(&s)) {
            *yi += t * self.alpha_inv;
        }
    }
}

/// One-level additive Schwarz `Σ_j R_jᵀ (R_j A R_jᵀ)⁻¹ R_j`.
pub struct OneLevelAs {
    decomposition: Decomposition,
    factors: Vec<Factorization>,
}

impl OneLevelAs {
    pub fn new(decomposition: Decomposition, a: &ComplexSparseMatrix) -> Result<Self> {
        let factors = decomposition
            .subdomains
            .par_iter()
            .map(|s| lu_factorize(&a.principal_submatrix(&s.dofs)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { decomposition, factors })
    }
}

impl LinearOperator for OneLevelAs {
    fn dim(&self) -> usize {
        self.decomposition.n_dofs
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let local: Vec<Vec<C64>> = self
            .decomposition
            .subdomains
            .par_iter()
            .zip(&self.factors)
            .map(|(s, f)| f.solve(&s.restrict(x)))
            .collect();
        y.fill(C64::new(0.0, 0.0));
        for (s, u) in self.decomposition.subdomains.iter().zip(&local) {
            s.prolong_add(u, y);
        }
    }
}

/// Columns `R_j C e_m` for every interior node `m` whose gradient touches
/// subdomain `j`, as a dense `n_j × g_j` block.
pub fn local_near_kernel(s: &Subdomain, sys: &MaxwellSystem) -> Mat<C64> {
    let mut col_of = std::collections::BTreeMap::new();
    for &g in &s.dofs {
        for &m in sys.c.row(g).0 {
            let next = col_of.len();
            col_of.entry(m).or_insert(next);
        }
    }
    // renumber by node index so the column order is deterministic
    let nodes: Vec<usize> = col_of.keys().copied().collect();
    let mut out = Mat::<C64>::zeros(s.len(), nodes.len());
    for (l, &g) in s.dofs.iter().enumerate() {
        let (cols, vals) = sys.c.row(g);
        for (&m, &v) in cols.iter().zip(vals) {
            let k = nodes.binary_search(&m).expect("node collected above");
            out[(l, k)] = v;
        }
    }
    out
}

fn lift(s: &Subdomain, u: impl Iterator<Item = C64>, n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    for ((&g, &w), x) in s.dofs.iter().zip(&s.weights).zip(u) {
        out[g] = x * w;
    }
    out
}

fn free_columns(dec: &Decomposition, sys: &MaxwellSystem) -> Vec<Vec<C64>> {
    let per: Vec<Vec<Vec<C64>>> = dec
        .subdomains
        .par_iter()
        .map(|s| {
            let g = local_near_kernel(s, sys);
            (0..g.ncols()).map(|k| lift(s, (0..g.nrows()).map(|i| g[(i, k)]), dec.n_dofs)).collect()
        })
        .collect();
    per.into_iter().flatten().collect()
}

/// The free coarse space `V_G = span(R_jᵀ D_j R_j C)`: localized gradients,
/// no eigensolves.
pub fn build_free_cs(dec: &Decomposition, sys: &MaxwellSystem) -> Result<CoarseSpace> {
    let cols = free_columns(dec, sys);
    if cols.is_empty() {
        return Ok(CoarseSpace::empty(dec.n_dofs, Provenance::MaxwellFree));
    }
    CoarseSpace::new(CoarseBasis::Dense(orthonormalize(&cols)), &sys.a, Provenance::MaxwellFree)
}

/// Local GenEO data on one subdomain: an orthonormal basis of `G_j = R_j G`,
/// the `b_j`-orthogonal projector `ξ₀ⱼ` onto it, and the selected pairs of
/// `(I−ξ₀ⱼᵀ) D_j A_j D_j (I−ξ₀ⱼ) V = λ Ã_j V`.
pub struct GeneoComplement {
    pub g: Mat<C64>,
    pub xi: Mat<C64>,
    pub pairs: Vec<EigenPair>,
    pub regularized: bool,
}

impl GeneoComplement {
    pub fn compute(
        dec: &Decomposition,
        j: usize,
        problem: &MaxwellProblem,
        sys: &MaxwellSystem,
        tau: f64,
        cap: usize,
    ) -> Result<Self> {
        let s = &dec.subdomains[j];
        let n = s.len();
        let aj = sys.a.principal_submatrix(&s.dofs).to_dense();
        let g = orthonormalize_columns(&local_near_kernel(s, sys));
        let xi = if g.ncols() == 0 {
            Mat::zeros(n, n)
        } else {
            let ag = &aj * &g;
            let gag = g.adjoint() * &ag;
            let lu = DenseLu::new(&gag)?;
            // ξ = G (GᵀAG)⁻¹ GᵀA
            &g * lu.solve_mat(&ag.adjoint().to_owned())
        };
        let proj = Mat::<C64>::identity(n, n) - &xi;
        let mut lhs = Mat::<C64>::zeros(n, n);
        {
            let mut dad = aj.clone();
            for c in 0..n {
                for r in 0..n {
                    dad[(r, c)] *= s.weights[r] * s.weights[c];
                }
            }
            let t = &dad * &proj;
            lhs += proj.adjoint() * &t;
        }
        // exact symmetry lets the Hermitian eigensolver path apply
        let sym = (&lhs + lhs.adjoint()) * faer::Scale(C64::new(0.5, 0.0));
        lhs = sym;

        let local_of = s.local_index(dec.n_dofs);
        let view = EdgeView { elements: &s.elements, local_of: &local_of, n_local: n };
        let (kj, mj) = assemble_edge_operators(problem, &sys.space, Some(&view))?;
        let neumann = kj.linear_combination(C64::new(1.0, 0.0), &mj, C64::new(problem.alpha, 0.0))?.to_dense();
        let opts = EigOptions { cap: Some(cap), ..EigOptions::default() };
        let mut regularized = false;
        let pairs = if cap == 0 || tau.is_infinite() {
            Vec::new()
        } else {
            match dense_generalized_eig(&lhs, &neumann, EigSelection::ReAbove(tau), &opts) {
                Ok(p) => p,
                Err(Error::Eigen { .. }) => {
                    regularized = true;
                    let trace: f64 = (0..n).map(|i| neumann[(i, i)].re).sum();
                    let shifted = &neumann + Mat::<C64>::identity(n, n) * faer::Scale(C64::new(1e-12 * trace, 0.0));
                    dense_generalized_eig(&lhs, &shifted, EigSelection::ReAbove(tau), &opts).map_err(|e| match e {
                        Error::Eigen { reason, found } => Error::Eigen { reason: format!("subdomain {j}: {reason}"), found },
                        other => other,
                    })?
                }
                Err(e) => return Err(e),
            }
        };
        Ok(Self { g, xi, pairs, regularized })
    }

    /// `R_jᵀ D_j (I − ξ₀ⱼ) V` for every selected `V`.
    pub fn lifted(&self, s: &Subdomain, n_global: usize) -> Vec<Vec<C64>> {
        let n = s.len();
        self.pairs
            .iter()
            .map(|p| {
                let v = &p.vector;
                let w: Vec<C64> = (0..n)
                    .map(|r| v[r] - (0..n).map(|c| self.xi[(r, c)] * v[c]).sum::<C64>())
                    .collect();
                lift(s, w.into_iter(), n_global)
            })
            .collect()
    }
}

/// `V_0 = V_G + V_geneo^τ`: the free space plus GenEO modes computed in the
/// `b_j`-orthogonal complement of the local near-kernel.
pub fn build_geneo_complement_cs(
    dec: &Decomposition,
    problem: &MaxwellProblem,
    sys: &MaxwellSystem,
    tau: f64,
    cap: usize,
) -> Result<CoarseSpace> {
    let mut cols = free_columns(dec, sys);
    let locals = (0..dec.len())
        .into_par_iter()
        .map(|j| GeneoComplement::compute(dec, j, problem, sys, tau, cap))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    for (j, (s, g)) in dec.subdomains.iter().zip(&locals).enumerate() {
        if g.regularized {
            warnings.push(format!("subdomain {j}: Neumann matrix shift-regularized"));
        }
        cols.extend(g.lifted(s, dec.n_dofs));
    }
    let mut cs = if cols.is_empty() {
        CoarseSpace::empty(dec.n_dofs, Provenance::MaxwellGeneo)
    } else {
        CoarseSpace::new(CoarseBasis::Dense(orthonormalize(&cols)), &sys.a, Provenance::MaxwellGeneo)?
    };
    cs.warnings = warnings;
    Ok(cs)
}

/// Empirical spectral bounds of a preconditioned operator.
#[derive(Debug, Clone)]
pub struct FslCheck {
    /// Smallest real part: the empirical `c_T`.
    pub c_t: f64,
    /// Largest real part: the empirical `c_R`.
    pub c_r: f64,
    pub max_imag: f64,
    pub eigenvalues: Vec<C64>,
}

impl FslCheck {
    pub fn ratio(&self) -> f64 {
        self.c_r / self.c_t
    }
}

/// Largest instance the dense check accepts.
pub const FSL_MAX_DOFS: usize = 500;

/// Densifies `M⁻¹A` and reports the extent of its spectrum.
pub fn fsl_bounds_check(a: &ComplexSparseMatrix, m: &dyn LinearOperator) -> Result<FslCheck> {
    let n = a.nrows();
    if n > FSL_MAX_DOFS {
        return Err(Error::Config(format!("dense spectral check limited to {FSL_MAX_DOFS} DOFs, got {n}")));
    }
    struct Composed<'a>(&'a ComplexSparseMatrix, &'a dyn LinearOperator);
    impl LinearOperator for Composed<'_> {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[C64], y: &mut [C64]) {
            self.1.apply(&self.0.mul_vec(x), y)
        }
    }
    let dense = operator_to_dense(&Composed(a, m));
    let eigenvalues = dense.eigenvalues().map_err(|e| Error::Eigen { reason: format!("{e:?}"), found: 0 })?;
    let c_t = eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let c_r = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let max_imag = eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(FslCheck { c_t, c_r, max_imag, eigenvalues })
}
