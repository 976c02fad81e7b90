//! Dense generalized eigensolver `A v = λ B v` at subdomain scale.
//!
//! Strategy, cheapest first:
//! 1. `B` Hermitian positive definite: Cholesky `B = LLᴴ`, then a standard
//!    eigenproblem for `L⁻¹AL⁻ᴴ` (self-adjoint when `A` is Hermitian).
//! 2. `B` merely invertible: eigenvalues of `B⁻¹A`.
//! 3. Either path failing the residual check: QZ on the pencil, with
//!    infinite eigenvalues discarded.

use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, Par, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: C64,
    /// Unit 2-norm.
    pub vector: Vec<C64>,
}

/// Which eigenpairs to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigSelection {
    /// `Re λ > t`, ordered by decreasing real part.
    ReAbove(f64),
    /// `Re λ < t`, ordered by increasing real part.
    ReBelow(f64),
    /// The `k` eigenvalues with largest real part.
    LargestRe(usize),
    /// `|λ − center| > radius`, farthest first.
    FarFrom { center: f64, radius: f64 },
    /// Every finite eigenvalue, increasing real part.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigOptions {
    /// Keep at most this many pairs after ordering.
    pub cap: Option<usize>,
    /// Relative residual bound `‖Av−λBv‖ ≤ tol·(‖A‖_F + |λ|‖B‖_F)`.
    pub residual_tol: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { cap: None, residual_tol: 1e-8 }
    }
}

fn frob(m: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

fn max_abs(m: &Mat<C64>) -> f64 {
    let mut s = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s = s.max(m[(i, j)].norm());
        }
    }
    s
}

fn hermitian_defect(m: &Mat<C64>) -> f64 {
    let n = m.nrows();
    let mut d = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

fn is_hermitian(m: &Mat<C64>) -> bool {
    hermitian_defect(m) <= 1e-13 * max_abs(m)
}

/// Raw eigenpairs (value, column of vectors) from one strategy.
struct Candidates {
    values: Vec<C64>,
    vectors: Mat<C64>,
}

fn via_cholesky(a: &Mat<C64>, b: &Mat<C64>) -> Option<Candidates> {
    let llt = b.llt(Side::Lower).ok()?;
    let l = llt.L();
    let n = a.nrows();
    // C = L⁻¹ A L⁻ᴴ
    let mut x = a.to_owned();
    solve_lower_triangular_in_place(l, x.as_mut(), Par::Seq);
    let mut c = x.adjoint().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let c = c.adjoint().to_owned();
    let (values, mut w) = if is_hermitian(a) {
        let herm = Mat::<C64>::from_fn(n, n, |i, j| (c[(i, j)] + c[(j, i)].conj()) * 0.5);
        let evd = herm.self_adjoint_eigen(Side::Lower).ok()?;
        let vals = (0..n).map(|i| C64::new(evd.S().column_vector()[i].re, 0.0)).collect();
        (vals, evd.U().to_owned())
    } else {
        let evd = c.eigen().ok()?;
        let vals = (0..n).map(|i| evd.S().column_vector()[i]).collect();
        (vals, evd.U().to_owned())
    };
    solve_upper_triangular_in_place(l.adjoint(), w.as_mut(), Par::Seq);
    Some(Candidates { values, vectors: w })
}

fn via_lu(a: &Mat<C64>, b: &Mat<C64>) -> Option<Candidates> {
    let n = a.nrows();
    let lu = b.partial_piv_lu();
    let bmax = max_abs(b);
    for i in 0..n {
        if !(lu.U()[(i, i)].norm() > 1e-13 * bmax) {
            return None;
        }
    }
    use faer::linalg::solvers::Solve;
    let c = lu.solve(a);
    let evd = c.eigen().ok()?;
    let values = (0..n).map(|i| evd.S().column_vector()[i]).collect();
    Some(Candidates { values, vectors: evd.U().to_owned() })
}

fn via_qz(a: &Mat<C64>, b: &Mat<C64>) -> Option<Candidates> {
    let n = a.nrows();
    let gevd = a.generalized_eigen(b).ok()?;
    let sa = gevd.S_a().column_vector();
    let sb = gevd.S_b().column_vector();
    let scale = (frob(a) + frob(b)).max(f64::MIN_POSITIVE);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        if sb[i].norm() <= 1e-14 * scale {
            values.push(C64::new(f64::INFINITY, 0.0));
        } else {
            values.push(sa[i] / sb[i]);
        }
    }
    Some(Candidates { values, vectors: gevd.U().to_owned() })
}

fn order(values: &[C64], which: EigSelection, cap: Option<usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len())
        .filter(|&i| values[i].re.is_finite() && values[i].im.is_finite())
        .collect();
    let by_re_asc = |x: &usize, y: &usize| {
        values[*x]
            .re
            .total_cmp(&values[*y].re)
            .then(values[*x].norm().total_cmp(&values[*y].norm()))
            .then(x.cmp(y))
    };
    let by_re_desc = |x: &usize, y: &usize| {
        values[*y]
            .re
            .total_cmp(&values[*x].re)
            .then(values[*x].norm().total_cmp(&values[*y].norm()))
            .then(x.cmp(y))
    };
    let mut limit = cap.unwrap_or(usize::MAX);
    match which {
        EigSelection::ReAbove(t) => {
            idx.retain(|&i| values[i].re > t);
            idx.sort_by(by_re_desc);
        }
        EigSelection::ReBelow(t) => {
            idx.retain(|&i| values[i].re < t);
            idx.sort_by(by_re_asc);
        }
        EigSelection::LargestRe(k) => {
            idx.sort_by(by_re_desc);
            limit = limit.min(k);
        }
        EigSelection::FarFrom { center, radius } => {
            let d = |i: usize| (values[i] - center).norm();
            idx.retain(|&i| d(i) > radius);
            idx.sort_by(|&a, &b| d(b).total_cmp(&d(a)));
        }
        EigSelection::All => idx.sort_by(by_re_asc),
    }
    idx.truncate(limit);
    idx
}

fn residual_ok(a: &Mat<C64>, b: &Mat<C64>, lambda: C64, v: &[C64], tol: f64, na: f64, nb: f64) -> bool {
    let n = v.len();
    let mut r2 = 0.0;
    for i in 0..n {
        let mut s = C64::new(0.0, 0.0);
        for j in 0..n {
            s += (a[(i, j)] - lambda * b[(i, j)]) * v[j];
        }
        r2 += s.norm_sqr();
    }
    let r = r2.sqrt();
    r.is_finite() && r <= tol * (na + lambda.norm() * nb)
}

fn extract(
    a: &Mat<C64>,
    b: &Mat<C64>,
    cand: &Candidates,
    which: EigSelection,
    opts: &EigOptions,
) -> (Vec<EigenPair>, usize) {
    let (na, nb) = (frob(a), frob(b));
    let n = a.nrows();
    let mut pairs = Vec::new();
    let mut failed = 0;
    for i in order(&cand.values, which, opts.cap) {
        let mut v: Vec<C64> = (0..n).map(|r| cand.vectors[(r, i)]).collect();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            failed += 1;
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        if residual_ok(a, b, cand.values[i], &v, opts.residual_tol, na, nb) {
            pairs.push(EigenPair { value: cand.values[i], vector: v });
        } else {
            failed += 1;
        }
    }
    (pairs, failed)
}

/// Selected eigenpairs of the pencil `(A, B)`; `B` may be singular.
pub fn dense_generalized_eig(
    a: &Mat<C64>,
    b: &Mat<C64>,
    which: EigSelection,
    opts: &EigOptions,
) -> Result<Vec<EigenPair>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::Structural("dense_generalized_eig: A and B must be square, same size".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut best: (Vec<EigenPair>, usize) = (Vec::new(), usize::MAX);
    let b_hermitian = is_hermitian(b);
    let strategies: [fn(&Mat<C64>, &Mat<C64>) -> Option<Candidates>; 3] = [via_cholesky, via_lu, via_qz];
    for (k, strategy) in strategies.iter().enumerate() {
        if k == 0 && !b_hermitian {
            continue;
        }
        let Some(cand) = strategy(a, b) else { continue };
        let (pairs, failed) = extract(a, b, &cand, which, opts);
        if failed == 0 {
            return Ok(pairs);
        }
        if failed < best.1 {
            best = (pairs, failed);
        }
    }
    Err(Error::Eigen {
        reason: format!("{} selected pairs violate the residual bound", best.1.min(n)),
        found: best.0.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(d: &[f64]) -> Mat<C64> {
        Mat::from_fn(d.len(), d.len(), |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    fn values(p: &[EigenPair]) -> Vec<f64> {
        let mut v: Vec<f64> = p.iter().map(|e| e.value.re).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn diagonal_standard() {
        let p = dense_generalized_eig(&diag(&[1.0, 2.0, 3.0]), &diag(&[1.0; 3]), EigSelection::All, &EigOptions::default())
            .unwrap();
        let v = values(&p);
        for (a, b) in v.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_ratio() {
        let p = dense_generalized_eig(&diag(&[2.0, 1.0]), &diag(&[1.0, 2.0]), EigSelection::All, &EigOptions::default())
            .unwrap();
        let v = values(&p);
        assert!((v[0] - 0.5).abs() < 1e-14 && (v[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn selection_rules() {
        let a = diag(&[0.1, 0.7, 3.0, -2.0, 5.0]);
        let b = diag(&[1.0; 5]);
        let o = EigOptions::default();
        let above = dense_generalized_eig(&a, &b, EigSelection::ReAbove(0.5), &o).unwrap();
        let close = |p: &[EigenPair], want: &[f64]| {
            p.len() == want.len() && p.iter().zip(want).all(|(x, y)| (x.value.re - y).abs() < 1e-13)
        };
        assert!(close(&above, &[5.0, 3.0, 0.7]));
        let below = dense_generalized_eig(&a, &b, EigSelection::ReBelow(0.5), &o).unwrap();
        assert!(close(&below, &[-2.0, 0.1]));
        let capped = dense_generalized_eig(&a, &b, EigSelection::ReAbove(0.5), &EigOptions { cap: Some(2), ..o }).unwrap();
        assert_eq!(capped.len(), 2);
        let top = dense_generalized_eig(&a, &b, EigSelection::LargestRe(1), &o).unwrap();
        assert!(close(&top, &[5.0]));
    }

    #[test]
    fn singular_b_drops_infinite_eigenvalues() {
        let a = diag(&[1.0, 2.0, 3.0]);
        let b = diag(&[1.0, 1.0, 0.0]);
        let p = dense_generalized_eig(&a, &b, EigSelection::All, &EigOptions::default()).unwrap();
        let v = values(&p);
        assert_eq!(v.len(), 2);
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn complex_symmetric_pencil_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 12;
        let mut a = Mat::<C64>::zeros(n, n);
        let mut b = Mat::<C64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                a[(i, j)] = z;
                a[(j, i)] = z;
                let w = C64::new(rng.random_range(-1.0..1.0), 0.3 * rng.random_range(-1.0..1.0));
                b[(i, j)] = w;
                b[(j, i)] = w;
            }
            b[(i, i)] += C64::new(n as f64, 0.0);
        }
        let p = dense_generalized_eig(&a, &b, EigSelection::All, &EigOptions::default()).unwrap();
        assert_eq!(p.len(), n);
    }

    /// det(A − λB) via dense LU, with its log-derivative −tr((A−λB)⁻¹B).
    fn det_and_logderiv(a: &Mat<f64>, b: &Mat<f64>, lambda: f64) -> (f64, f64) {
        let n = a.nrows();
        let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)] - lambda * b[(i, j)]).collect()).collect();
        let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| m[x][k].abs().total_cmp(&m[y][k].abs())).unwrap();
            if p != k {
                m.swap(p, k);
                inv.swap(p, k);
                det = -det;
            }
            let piv = m[k][k];
            det *= piv;
            for j in 0..n {
                m[k][j] /= piv;
                inv[k][j] /= piv;
            }
            for i in 0..n {
                if i != k {
                    let f = m[i][k];
                    for j in 0..n {
                        m[i][j] -= f * m[k][j];
                        inv[i][j] -= f * inv[k][j];
                    }
                }
            }
        }
        let mut tr = 0.0;
        for i in 0..n {
            for j in 0..n {
                tr += inv[i][j] * b[(j, i)];
            }
        }
        (det, -tr)
    }

    #[test]
    fn matches_characteristic_polynomial_roots() {
        let n = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut a = Mat::<f64>::zeros(n, n);
        let g = Mat::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        for i in 0..n {
            for j in 0..=i {
                let z = rng.random_range(-1.0..1.0);
                a[(i, j)] = z;
                a[(j, i)] = z;
            }
        }
        let mut b = &g * g.transpose();
        for i in 0..n {
            b[(i, i)] += 1.0;
        }
        // coefficients of p(λ) = det(A − λB) by interpolation at Chebyshev nodes
        let radius = 4.0;
        let nodes: Vec<f64> =
            (0..=n).map(|k| radius * ((2 * k + 1) as f64 * std::f64::consts::PI / (2.0 * (n + 1) as f64)).cos()).collect();
        let vals: Vec<f64> = nodes.iter().map(|&x| det_and_logderiv(&a, &b, x).0).collect();
        let vander = Mat::<f64>::from_fn(n + 1, n + 1, |i, j| nodes[i].powi(j as i32));
        let rhs = Mat::<f64>::from_fn(n + 1, 1, |i, _| vals[i]);
        use faer::linalg::solvers::Solve;
        let coef = vander.partial_piv_lu().solve(&rhs);
        // companion matrix of the monic polynomial
        let lead = coef[(n, 0)];
        let comp = Mat::<f64>::from_fn(n, n, |i, j| {
            if i == 0 {
                -coef[(n - 1 - j, 0)] / lead
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        let mut roots: Vec<f64> = comp.eigenvalues().unwrap().iter().map(|z| z.re).collect();
        // Newton polish on det: λ ← λ − p/p' = λ − 1/(p'/p)
        for r in roots.iter_mut() {
            for _ in 0..50 {
                let (_, ld) = det_and_logderiv(&a, &b, *r);
                let step = 1.0 / ld;
                if !step.is_finite() {
                    break;
                }
                *r -= step;
                if step.abs() < 1e-15 * r.abs().max(1.0) {
                    break;
                }
            }
        }
        roots.sort_by(f64::total_cmp);
        let ac = Mat::<C64>::from_fn(n, n, |i, j| C64::new(a[(i, j)], 0.0));
        let bc = Mat::<C64>::from_fn(n, n, |i, j| C64::new(b[(i, j)], 0.0));
        let p = dense_generalized_eig(&ac, &bc, EigSelection::All, &EigOptions::default()).unwrap();
        let got = values(&p);
        assert_eq!(got.len(), n);
        for (x, y) in got.iter().zip(&roots) {
            assert!((x - y).abs() <= 1e-8 * y.abs().max(1.0), "{x} vs {y}");
        }
    }
}
