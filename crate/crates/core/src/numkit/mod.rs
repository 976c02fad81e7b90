//! Complex linear algebra kernels shared by every solver in the crate.
//!
//! Dense matrices are [`faer::Mat`] (column-major). Vectors are plain
//! `Vec<Complex64>` slices so operators compose without copies.

mod eig;
mod factor;
mod krylov;
mod ortho;
mod sparse;

pub use eig::{dense_generalized_eig, EigOptions, EigSelection, EigenPair};
pub use factor::{lu_factorize, DenseLu, Factorization};
pub use krylov::{
    cg, gmres, krylov_solve, IdentityOperator, KrylovConfig, KrylovVariant, SolveOutcome,
};
pub use ortho::{orthonormalize, orthonormalize_columns};
pub use sparse::{csr_from_triplets, ComplexSparseMatrix, TripletBuilder};

pub use num_complex::Complex64 as C64;

/// Square linear map `y = Op(x)` applied through a callback.
///
/// Implementations must be pure: no interior mutation during `apply`, so a
/// single operator can serve concurrent callers.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// Writes `Op(x)` into `y`; both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[C64], y: &mut [C64]);

    fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(x, &mut y);
        y
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply(x, y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply(x, y)
    }
}

/// Densifies an operator column by column. Only meant for small instances.
pub fn operator_to_dense(op: &dyn LinearOperator) -> faer::Mat<C64> {
    let n = op.dim();
    let mut out = faer::Mat::<C64>::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut y = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        op.apply(&e, &mut y);
        for i in 0..n {
            out[(i, j)] = y[i];
        }
        e[j] = C64::new(0.0, 0.0);
    }
    out
}

#[inline]
pub fn zeros(n: usize) -> Vec<C64> {
    vec![C64::new(0.0, 0.0); n]
}

/// Hermitian inner product `xᴴ y`.
#[inline]
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
}

#[inline]
pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

#[inline]
pub fn norm_inf(x: &[C64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.norm()))
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn is_finite(x: &[C64]) -> bool {
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// `‖a − b‖₂ / ‖b‖₂`, or the absolute norm when `b` vanishes.
pub fn relative_error(a: &[C64], b: &[C64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let nb = norm2(b);
    if nb == 0.0 {
        diff
    } else {
        diff / nb
    }
}
