//! Direct factorizations: sparse LU for subdomain and global operators,
//! dense LU for coarse matrices.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::Mat;
use num_complex::Complex64 as C64;

use super::{is_finite, norm_inf, ComplexSparseMatrix, LinearOperator};
use crate::error::{Error, Result};

/// Growth bound `‖A‖·‖x‖/‖b‖` beyond which a probe solve is taken as singular.
const PROBE_GROWTH_LIMIT: f64 = 1e14;

/// Sparse LU with partial pivoting, reusable for any number of solves.
pub struct Factorization {
    dim: usize,
    lu: Lu<usize, C64>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("dim", &self.dim).finish_non_exhaustive()
    }
}

fn probe_rhs(n: usize) -> Vec<C64> {
    (0..n).map(|i| C64::new(1.0 + (i % 7) as f64 / 7.0, 0.25 * ((i % 3) as f64 - 1.0))).collect()
}

/// Factorizes a square sparse matrix.
///
/// faer does not expose its pivots, so singularity is detected with one probe
/// solve: a non-finite result or an amplification beyond `1e14` relative to
/// `max|A|` is reported as [`Error::Singular`].
pub fn lu_factorize(a: &ComplexSparseMatrix) -> Result<Factorization> {
    if a.nrows() != a.ncols() {
        return Err(Error::Structural(format!("lu_factorize: {}x{} not square", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    if n == 0 {
        return Err(Error::Structural("lu_factorize: empty matrix".into()));
    }
    let amax = a.max_abs();
    if amax == 0.0 || !a.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Singular("matrix is zero or non-finite".into()));
    }
    let csc = a.to_faer_csc();
    let lu = csc.sp_lu().map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
    let fact = Factorization { dim: n, lu };

    let b = probe_rhs(n);
    let x = fact.solve(&b);
    if !is_finite(&x) {
        return Err(Error::Singular("zero pivot encountered".into()));
    }
    let growth = amax * norm_inf(&x) / norm_inf(&b);
    if growth > PROBE_GROWTH_LIMIT {
        return Err(Error::Singular(format!("pivot below threshold (growth {growth:.2e})")));
    }
    Ok(fact)
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        assert_eq!(b.len(), self.dim, "solve: rhs length");
        let view = faer::MatMut::from_column_major_slice_mut(b, self.dim, 1);
        self.lu.solve_in_place(view);
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solves for every column of `rhs` at once.
    pub fn solve_mat_in_place(&self, rhs: &mut Mat<C64>) {
        assert_eq!(rhs.nrows(), self.dim);
        self.lu.solve_in_place(rhs.as_mut());
    }
}

impl LinearOperator for Factorization {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(x);
        self.solve_in_place(y);
    }
}

/// Dense LU with partial pivoting, used for coarse matrices.
pub struct DenseLu {
    dim: usize,
    lu: faer::linalg::solvers::PartialPivLu<C64>,
}

impl std::fmt::Debug for DenseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseLu").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl DenseLu {
    /// Fails when a pivot falls below `1e-14·max|A|`.
    pub fn new(a: &Mat<C64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Structural("DenseLu: matrix not square".into()));
        }
        let n = a.nrows();
        let mut amax = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                amax = amax.max(a[(i, j)].norm());
            }
        }
        if n == 0 || amax == 0.0 || !amax.is_finite() {
            return Err(Error::Singular("dense matrix empty, zero or non-finite".into()));
        }
        let lu = a.partial_piv_lu();
        let u = lu.U();
        for i in 0..n {
            let p = u[(i, i)].norm();
            if !(p > 1e-14 * amax) {
                return Err(Error::Singular(format!("dense pivot {i} = {p:.2e}")));
            }
        }
        Ok(Self { dim: n, lu })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        assert_eq!(b.len(), self.dim);
        let view = faer::MatMut::from_column_major_slice_mut(b, self.dim, 1);
        self.lu.solve_in_place(view);
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_mat(&self, rhs: &Mat<C64>) -> Mat<C64> {
        self.lu.solve(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{csr_from_triplets, relative_error};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_solve_is_exact() {
        let a = ComplexSparseMatrix::identity(5);
        let f = lu_factorize(&a).unwrap();
        let b: Vec<C64> = (0..5).map(|i| C64::new(i as f64, -1.0)).collect();
        assert_eq!(f.solve(&b), b);
    }

    /// Plain Gaussian elimination without pivoting; fine for the SPD tridiagonal.
    fn dense_gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            for i in k + 1..n {
                let m = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= m * a[k][j];
                }
                b[i] -= m * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn tridiagonal_matches_gaussian_elimination() {
        let n = 10;
        let mut t = Vec::new();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            t.push((i, i, c(2.0)));
            dense[i][i] = 2.0;
            if i > 0 {
                t.push((i, i - 1, c(-1.0)));
                dense[i][i - 1] = -1.0;
            }
            if i + 1 < n {
                t.push((i, i + 1, c(-1.0)));
                dense[i][i + 1] = -1.0;
            }
        }
        let a = csr_from_triplets(n, n, &t).unwrap();
        let x = lu_factorize(&a).unwrap().solve(&vec![c(1.0); n]);
        let oracle = dense_gauss(dense, vec![1.0; n]);
        for i in 0..n {
            assert!((x[i] - c(oracle[i])).norm() < 1e-12, "{i}: {} vs {}", x[i], oracle[i]);
        }
        // closed form i(n+1-i)/2 with 1-based i
        assert!((oracle[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_is_singular() {
        let a = csr_from_triplets(2, 2, &[(0, 0, c(1.0)), (0, 1, c(1.0)), (1, 0, c(1.0)), (1, 1, c(1.0))])
            .unwrap();
        assert!(matches!(lu_factorize(&a), Err(Error::Singular(_))));
    }

    #[test]
    fn structurally_empty_row_is_singular() {
        let a = csr_from_triplets(2, 2, &[(0, 0, c(1.0))]).unwrap();
        assert!(lu_factorize(&a).is_err());
    }

    #[test]
    fn dense_lu_round_trip() {
        let a = Mat::<C64>::from_fn(4, 4, |i, j| if i == j { c(4.0) } else { C64::new(0.5, (i as f64) - (j as f64)) });
        let lu = DenseLu::new(&a).unwrap();
        let x: Vec<C64> = (0..4).map(|i| C64::new(1.0, i as f64)).collect();
        let b: Vec<C64> = (0..4).map(|i| (0..4).map(|j| a[(i, j)] * x[j]).sum()).collect();
        assert!(relative_error(&lu.solve(&b), &x) < 1e-13);
        let s = Mat::<C64>::from_fn(2, 2, |_, _| c(1.0));
        assert!(DenseLu::new(&s).is_err());
    }
}
