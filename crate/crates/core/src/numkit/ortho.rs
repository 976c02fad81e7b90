//! Rank-revealing orthonormalization of coarse basis candidates.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64 as C64;

/// Columns whose norm shrinks below this fraction of the input norm are dropped.
const DROP_TOL: f64 = 1e-10;
const BLOCK: usize = 32;

/// Orthonormal basis of `span(vectors)`; all vectors must share one length.
pub fn orthonormalize(vectors: &[Vec<C64>]) -> Mat<C64> {
    let n = vectors.first().map_or(0, Vec::len);
    let m = Mat::<C64>::from_fn(n, vectors.len(), |i, j| vectors[j][i]);
    orthonormalize_columns(&m)
}

/// Block classical Gram–Schmidt with reorthogonalization, modified
/// Gram–Schmidt inside each block.
pub fn orthonormalize_columns(x: &Mat<C64>) -> Mat<C64> {
    let n = x.nrows();
    let m = x.ncols();
    let mut q = Mat::<C64>::zeros(n, m);
    let mut k = 0usize;
    let mut start = 0usize;
    while start < m {
        let bs = BLOCK.min(m - start);
        let mut blk = x.subcols(start, bs).to_owned();
        let orig: Vec<f64> = (0..bs).map(|j| blk.col(j).norm_l2()).collect();
        if k > 0 {
            for _ in 0..2 {
                let qk = q.subcols(0, k);
                let coef = qk.adjoint() * &blk;
                matmul(blk.as_mut(), Accum::Add, qk, coef.as_ref(), C64::new(-1.0, 0.0), Par::Seq);
            }
        }
        let first = k;
        for j in 0..bs {
            let mut v: Vec<C64> = (0..n).map(|i| blk[(i, j)]).collect();
            for _ in 0..2 {
                for c in first..k {
                    let qc = q.col(c);
                    let mut h = C64::new(0.0, 0.0);
                    for i in 0..n {
                        h += qc[i].conj() * v[i];
                    }
                    for i in 0..n {
                        v[i] -= h * qc[i];
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if orig[j] == 0.0 || !(norm > DROP_TOL * orig[j]) {
                continue;
            }
            for i in 0..n {
                q[(i, k)] = v[i] / norm;
            }
            k += 1;
        }
        start += bs;
    }
    q.subcols(0, k).to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, i: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[i] = C64::new(1.0, 0.0);
        v
    }

    fn gram_defect(q: &Mat<C64>) -> f64 {
        let g = q.adjoint() * q;
        let mut d = 0.0f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let t = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                d = d.max((g[(i, j)] - t).norm());
            }
        }
        d
    }

    #[test]
    fn duplicate_dropped() {
        let q = orthonormalize(&[e(3, 0), e(3, 0)]);
        assert_eq!(q.ncols(), 1);
        assert!((q[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_independent() {
        let q = orthonormalize(&[e(3, 0), e(3, 1)]);
        assert_eq!(q.ncols(), 2);
        assert!(gram_defect(&q) < 1e-15);
        for i in 0..2 {
            assert_eq!(q[(2, i)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn all_zero_gives_empty() {
        let q = orthonormalize(&vec![vec![C64::new(0.0, 0.0); 4]; 3]);
        assert_eq!(q.ncols(), 0);
    }

    #[test]
    fn rank_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vs: Vec<Vec<C64>> = (0..5)
            .map(|_| (0..3).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
            .collect();
        let m = Mat::<C64>::from_fn(3, 5, |i, j| vs[j][i]);
        let sv = m.singular_values().unwrap();
        let rank = sv.iter().filter(|&&s| s > 1e-10 * sv[0]).count();
        assert_eq!(rank, 3);
        let q = orthonormalize(&vs);
        assert_eq!(q.ncols(), rank);
        assert!(gram_defect(&q) < 1e-14);
    }

    #[test]
    fn many_columns_across_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 80;
        let base: Vec<Vec<C64>> =
            (0..50).map(|_| (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect()).collect();
        // 50 independent plus 20 combinations of them
        let mut vs = base.clone();
        for k in 0..20 {
            let v: Vec<C64> = (0..n).map(|i| base[k][i] * 2.0 - base[k + 7][i]).collect();
            vs.push(v);
        }
        let q = orthonormalize(&vs);
        assert_eq!(q.ncols(), 50);
        assert!(gram_defect(&q) < 1e-13);
    }
}
