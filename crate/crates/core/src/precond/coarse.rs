use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{lu_factorize, ComplexSparseMatrix, DenseLu, Factorization, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Grid,
    Dtn,
    HGeneo,
    DeltaGeneo,
    MaxwellFree,
    MaxwellGeneo,
}

/// Coarse basis `Z`: sparse for nodal interpolation, dense (orthonormal
/// columns) for spectral spaces.
#[derive(Debug, Clone)]
pub enum CoarseBasis {
    Sparse(ComplexSparseMatrix),
    Dense(Mat<C64>),
}

impl CoarseBasis {
    pub fn nrows(&self) -> usize {
        match self {
            Self::Sparse(z) => z.nrows(),
            Self::Dense(z) => z.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Self::Sparse(z) => z.ncols(),
            Self::Dense(z) => z.ncols(),
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        match self {
            Self::Sparse(z) => z.to_dense(),
            Self::Dense(z) => z.clone(),
        }
    }

    /// `Zᴴ v`.
    fn adjoint_mul(&self, v: &[C64]) -> Vec<C64> {
        match self {
            Self::Sparse(z) => z.mul_vec_adjoint(v),
            Self::Dense(z) => {
                let mut out = vec![C64::new(0.0, 0.0); z.ncols()];
                let x = MatRef::from_column_major_slice(v, v.len(), 1);
                let o = MatMut::from_column_major_slice_mut(&mut out, z.ncols(), 1);
                matmul(o, Accum::Replace, z.adjoint(), x, C64::new(1.0, 0.0), Par::Seq);
                out
            }
        }
    }

    /// `y += Z c`.
    fn mul_add(&self, c: &[C64], y: &mut [C64]) {
        match self {
            Self::Sparse(z) => {
                for (yi, v) in y.iter_mut().zip(z.mul_vec(c)) {
                    *yi += v;
                }
            }
            Self::Dense(z) => {
                let n = y.len();
                let x = MatRef::from_column_major_slice(c, c.len(), 1);
                let o = MatMut::from_column_major_slice_mut(y, n, 1);
                matmul(o, Accum::Add, z.as_ref(), x, C64::new(1.0, 0.0), Par::Seq);
            }
        }
    }
}

enum CoarseSolver {
    Empty,
    Dense(DenseLu),
    Sparse(Factorization),
}

/// `Z`, the coarse matrix `E = Zᴴ A Z` and its factorization.
pub struct CoarseSpace {
    basis: CoarseBasis,
    e: Mat<C64>,
    solver: CoarseSolver,
    pub provenance: Provenance,
    /// Non-fatal events met while building (regularized solves, skipped subdomains).
    pub warnings: Vec<String>,
}

impl std::fmt::Debug for CoarseSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoarseSpace")
            .field("provenance", &self.provenance)
            .field("dim", &self.dim())
            .field("warnings", &self.warnings)
            .finish()
    }
}

/// Coarse matrices above this size stay sparse and are not densified.
const DENSE_E_LIMIT: usize = 3000;

impl CoarseSpace {
    pub fn new(basis: CoarseBasis, a: &ComplexSparseMatrix, provenance: Provenance) -> Result<Self> {
        if basis.nrows() != a.nrows() {
            return Err(Error::Structural(format!("coarse basis has {} rows, operator {}", basis.nrows(), a.nrows())));
        }
        let n0 = basis.ncols();
        let (e, solver) = if n0 == 0 {
            (Mat::zeros(0, 0), CoarseSolver::Empty)
        } else {
            match &basis {
                CoarseBasis::Sparse(z) => {
                    let e = z.adjoint().matmul(&a.matmul(z)?)?;
                    let fact = lu_factorize(&e).map_err(|err| Error::Singular(format!("coarse matrix: {err}")))?;
                    let dense = if n0 <= DENSE_E_LIMIT { e.to_dense() } else { Mat::zeros(0, 0) };
                    (dense, CoarseSolver::Sparse(fact))
                }
                CoarseBasis::Dense(z) => {
                    let az = a.mul_dense(z);
                    let e = z.adjoint() * &az;
                    let lu = DenseLu::new(&e).map_err(|err| Error::Singular(format!("coarse matrix: {err}")))?;
                    (e, CoarseSolver::Dense(lu))
                }
            }
        };
        Ok(Self { basis, e, solver, provenance, warnings: Vec::new() })
    }

    /// The zero coarse space on `n` unknowns.
    pub fn empty(n: usize, provenance: Provenance) -> Self {
        Self { basis: CoarseBasis::Dense(Mat::zeros(n, 0)), e: Mat::zeros(0, 0), solver: CoarseSolver::Empty, provenance, warnings: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &CoarseBasis {
        &self.basis
    }

    /// Dense `E`; empty when `E` was too large to densify.
    pub fn coarse_matrix(&self) -> &Mat<C64> {
        &self.e
    }

    /// 2-norm condition number of `E` from its singular values.
    pub fn condition_number(&self) -> Option<f64> {
        if self.e.nrows() == 0 {
            return None;
        }
        let sv = self.e.singular_values().ok()?;
        let max = sv.iter().copied().fold(0.0, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        Some(max / min)
    }

    /// `y += H v` with `H = Z E⁻¹ Zᴴ`.
    pub fn correction_add(&self, v: &[C64], y: &mut [C64]) {
        let mut c = self.basis.adjoint_mul(v);
        match &self.solver {
            CoarseSolver::Empty => return,
            CoarseSolver::Dense(lu) => lu.solve_in_place(&mut c),
            CoarseSolver::Sparse(f) => f.solve_in_place(&mut c),
        }
        self.basis.mul_add(&c, y);
    }

    pub fn correction(&self, v: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); v.len()];
        self.correction_add(v, &mut y);
        y
    }
}

/// `H = Z E⁻¹ Zᴴ` as an operator.
impl LinearOperator for CoarseSpace {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.fill(C64::new(0.0, 0.0));
        self.correction_add(x, y);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoLevelMode {
    /// `M⁻¹ + H`.
    Additive,
    /// `Q M⁻¹ P + H` with `P = I − AH`, `Q = I − HA`.
    #[default]
    Hybrid,
}

/// One-level operator `M⁻¹` combined with a coarse correction.
pub struct TwoLevel<M> {
    pub one_level: M,
    pub coarse: CoarseSpace,
    a: ComplexSparseMatrix,
    pub mode: TwoLevelMode,
}

impl<M: LinearOperator> TwoLevel<M> {
    pub fn new(one_level: M, coarse: CoarseSpace, a: ComplexSparseMatrix, mode: TwoLevelMode) -> Result<Self> {
        if one_level.dim() != a.nrows() || coarse.n() != a.nrows() {
            return Err(Error::Structural("two-level pieces have different sizes".into()));
        }
        Ok(Self { one_level, coarse, a, mode })
    }
}

impl<M: LinearOperator> LinearOperator for TwoLevel<M> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, v: &[C64], y: &mut [C64]) {
        match self.mode {
            TwoLevelMode::Additive => {
                self.one_level.apply(v, y);
                self.coarse.correction_add(v, y);
            }
            TwoLevelMode::Hybrid => {
                if self.coarse.is_empty() {
                    self.one_level.apply(v, y);
                    return;
                }
                // QM⁻¹Pv + Hv = w + H(v − Aw) with w = M⁻¹(v − AHv)
                let hv = self.coarse.correction(v);
                let ahv = self.a.mul_vec(&hv);
                let r: Vec<C64> = v.iter().zip(&ahv).map(|(a, b)| a - b).collect();
                self.one_level.apply(&r, y);
                let aw = self.a.mul_vec(y);
                let s: Vec<C64> = v.iter().zip(&aw).map(|(a, b)| a - b).collect();
                self.coarse.correction_add(&s, y);
            }
        }
    }
}
