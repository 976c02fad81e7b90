use faer::Mat;
use num_complex::Complex64 as C64;

use super::*;
use crate::dd::{decompose, Decomposition, OverlapSpec, PartitionShape};
use crate::helmholtz::{build_rect_mesh, refine_uniform, ElementOrder};
use crate::numkit::{krylov_solve, operator_to_dense, KrylovConfig, LinearOperator};
use crate::precond::{TwoLevel, TwoLevelMode};

fn square(n: usize) -> Mesh {
    build_rect_mesh(1.0, 1.0, n, n, ElementOrder::P1).unwrap()
}

fn system(mesh: Mesh, alpha: f64, eps: impl Fn(f64, f64) -> f64) -> (MaxwellProblem, MaxwellSystem) {
    let p = MaxwellProblem::with_permittivity(mesh, alpha, eps).unwrap();
    let s = assemble_maxwell(&p).unwrap();
    (p, s)
}

fn dec(p: &MaxwellProblem, s: &MaxwellSystem, n: usize) -> Decomposition {
    decompose(&p.mesh, &s.space, n, PartitionShape::Auto, OverlapSpec::default()).unwrap()
}

fn max_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

fn max_abs(a: &Mat<C64>) -> f64 {
    max_diff(a, &Mat::zeros(a.nrows(), a.ncols()))
}

fn cg_iters(a: &crate::numkit::ComplexSparseMatrix, m: &dyn LinearOperator, seed: u64) -> usize {
    let b = random_load(a.nrows(), seed);
    let out = krylov_solve(a, Some(m), &b, &KrylovConfig::cg(1e-6)).unwrap();
    assert!(out.converged);
    out.iterations
}

#[test]
fn reference_triangle_curl_curl_has_rank_one() {
    let mesh = build_rect_mesh(1.0, 1.0, 1, 1, ElementOrder::P1).unwrap();
    let space = EdgeSpace::new(&mesh);
    let w = whitney(&mesh, &space, 0).unwrap();
    let mut k = Mat::<C64>::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            k[(i, j)] = C64::new(w.area * w.curl[i] * w.curl[j], 0.0);
        }
    }
    let sv = k.singular_values().unwrap();
    let rank = sv.iter().filter(|s| **s > 1e-12 * sv[0]).count();
    assert_eq!(rank, 1);
    // the local gradient of each vertex hat function is curl-free
    for v in 0..3 {
        let mut g = [0.0; 3];
        for (e, [t, h]) in w.ends.iter().enumerate() {
            g[e] = f64::from(u8::from(*h == v)) - f64::from(u8::from(*t == v));
        }
        let kg: f64 = (0..3).map(|e| w.curl[e] * g[e]).sum();
        assert!(kg.abs() < 1e-14);
    }
}

#[test]
fn whitney_mass_reproduces_constant_field_energy() {
    // a constant field has circulations t·u on every edge
    let mesh = square(3);
    let space = EdgeSpace::new(&mesh);
    let u = [0.3, -1.1];
    for e in 0..mesh.n_elements() {
        let w = whitney(&mesh, &space, e).unwrap();
        let pts = mesh.coords(e);
        let circ: Vec<f64> = w.ends.iter().map(|[a, b]| u[0] * (pts[*b][0] - pts[*a][0]) + u[1] * (pts[*b][1] - pts[*a][1])).collect();
        let energy: f64 = (0..3).flat_map(|k| (0..3).map(move |l| (k, l))).map(|(k, l)| circ[k] * circ[l] * whitney_mass(&w, k, l)).sum();
        assert!((energy - w.area * (u[0] * u[0] + u[1] * u[1])).abs() < 1e-14);
    }
}

#[test]
fn gradients_are_in_the_curl_kernel() {
    let (_, s) = system(refine_uniform(&square(3), 1).unwrap(), 0.5, |x, y| 1.0 + 40.0 * x * y);
    let kc = s.k.matmul(&s.c).unwrap();
    assert!(kc.max_abs() <= 1e-13 * s.k.max_abs());
    // the Whitney gradient energy is exactly the nodal stiffness
    let ctmc = s.c.transpose().matmul(&s.mass.matmul(&s.c).unwrap()).unwrap();
    let (_, unit) = system(refine_uniform(&square(3), 1).unwrap(), 0.5, |_, _| 1.0);
    let ctmc_unit = unit.c.transpose().matmul(&unit.mass.matmul(&unit.c).unwrap()).unwrap();
    let diff = ctmc_unit.linear_combination(C64::new(1.0, 0.0), &unit.l, C64::new(-1.0, 0.0)).unwrap();
    assert!(diff.max_abs() <= 1e-13 * unit.l.max_abs());
    assert!(ctmc.is_symmetric(1e-14));
}

#[test]
fn operator_is_spd_for_unit_coefficients() {
    let (_, s) = system(square(6), 1.0, |_, _| 1.0);
    assert!(s.a.nrows() <= 300);
    assert!(s.a.is_symmetric(1e-14) && s.a.is_real());
    let d = s.a.to_dense();
    let eig = d.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
    assert!(eig[0] > 0.0);
    assert!(crate::numkit::lu_factorize(&s.a).is_ok());
}

#[test]
fn asp_is_linear_and_mesh_independent() {
    let (_, s) = system(refine_uniform(&square(8), 1).unwrap(), 1.0, |_, _| 1.0);
    let asp = Asp::new(&s).unwrap();
    let z = asp.apply_vec(&vec![C64::new(0.0, 0.0); s.a.nrows()]);
    assert!(z.iter().all(|v| v.norm() == 0.0));
    let coarse = cg_iters(&s.a, &asp, 3);
    let (_, s1) = system(refine_uniform(&square(8), 2).unwrap(), 1.0, |_, _| 1.0);
    let (_, s2) = system(refine_uniform(&square(8), 3).unwrap(), 1.0, |_, _| 1.0);
    let mid = cg_iters(&s1.a, &Asp::new(&s1).unwrap(), 3);
    let fine = cg_iters(&s2.a, &Asp::new(&s2).unwrap(), 3);
    assert!(coarse.abs_diff(mid) <= 2 && mid.abs_diff(fine) <= 2, "{coarse} {mid} {fine}");
}

#[test]
fn two_level_projection_and_symmetry() {
    let (p, s) = system(square(6), 1.0, |x, _| 1.0 + x);
    let d = dec(&p, &s, 4);
    let cs = build_free_cs(&d, &s).unwrap();
    let h = operator_to_dense(&cs);
    let a = s.a.to_dense();
    let ha = &h * &a;
    assert!(max_diff(&(&ha * &ha), &ha) <= 1e-12 * max_abs(&ha).max(1.0));
    let t = TwoLevel::new(OneLevelAs::new(d, &s.a).unwrap(), cs, s.a.clone(), TwoLevelMode::Hybrid).unwrap();
    let m = operator_to_dense(&t);
    assert!(max_diff(&m, &m.transpose().to_owned()) <= 1e-12 * max_abs(&m));
}

#[test]
fn single_domain_free_space_contains_gradients() {
    // Kc is only zero to rounding, and a small α would amplify that by 1/α
    let (p, s) = system(square(5), 1.0, |_, _| 1.0);
    let d = dec(&p, &s, 1);
    let cs = build_free_cs(&d, &s).unwrap();
    let c = s.c.to_dense();
    for m in 0..c.ncols() {
        let col: Vec<C64> = (0..c.nrows()).map(|i| c[(i, m)]).collect();
        let back = cs.correction(&s.a.mul_vec(&col));
        let err = crate::numkit::relative_error(&back, &col);
        assert!(err <= 1e-12, "gradient {m}: {err:e}");
    }
}

#[test]
fn global_gradients_lie_in_free_space() {
    let (p, s) = system(square(6), 1e-2, |_, _| 1.0);
    let d = dec(&p, &s, 4);
    let cs = build_free_cs(&d, &s).unwrap();
    let z = cs.basis().to_dense();
    let c = s.c.to_dense();
    let resid = &c - &z * (z.adjoint() * &c);
    assert!(max_abs(&resid) <= 1e-10 * max_abs(&c));
}

#[test]
fn complement_projector_is_idempotent() {
    let (p, s) = system(square(6), 1e-2, channel_permittivity(1.0, 1.0, 1e4));
    let d = dec(&p, &s, 4);
    let g = GeneoComplement::compute(&d, 1, &p, &s, 0.0, 5).unwrap();
    assert!(max_diff(&(&g.xi * &g.xi), &g.xi) <= 1e-10 * max_abs(&g.xi));
    assert!(max_diff(&(&g.xi * &g.g), &g.g) <= 1e-10);
    assert_eq!(g.pairs.len(), 5);
    // eigenvectors live in the complement up to the null directions of the pencil
    assert!(g.pairs.iter().all(|q| q.value.im.abs() < 1e-8 && q.value.re > 0.0));
}

#[test]
fn infinite_tau_reduces_to_free_space() {
    let (p, s) = system(square(6), 1e-2, channel_permittivity(1.0, 1.0, 1e2));
    let d = dec(&p, &s, 4);
    let free = build_free_cs(&d, &s).unwrap();
    let both = build_geneo_complement_cs(&d, &p, &s, f64::INFINITY, 20).unwrap();
    assert_eq!(free.dim(), both.dim());
    let (h0, h1) = (operator_to_dense(&free), operator_to_dense(&both));
    assert!(max_diff(&h0, &h1) <= 1e-10 * max_abs(&h0));
}

#[test]
fn homogeneous_geneo_adds_few_modes() {
    let (p, s) = system(square(8), 1e-2, |_, _| 1.0);
    let d = dec(&p, &s, 4);
    let free = build_free_cs(&d, &s).unwrap();
    let both = build_geneo_complement_cs(&d, &p, &s, 10.0, 20).unwrap();
    assert!(both.dim() <= free.dim() + 2 * d.len());
}

#[test]
fn fsl_check_of_exact_inverse_is_identity() {
    let (_, s) = system(square(6), 1e-1, |_, _| 1.0);
    let lu = crate::numkit::lu_factorize(&s.a).unwrap();
    let f = fsl_bounds_check(&s.a, &lu).unwrap();
    assert!(f.eigenvalues.iter().all(|z| (z - 1.0).norm() < 1e-12));
    assert!((f.ratio() - 1.0).abs() < 1e-12);
    let big = system(square(20), 1.0, |_, _| 1.0).1;
    assert!(fsl_bounds_check(&big.a, &crate::numkit::IdentityOperator(big.a.nrows())).is_err());
}

#[test]
fn one_level_lower_bound_degrades_with_n() {
    let (p, s) = system(square(8), 1e-2, |_, _| 1.0);
    let c_t: Vec<f64> = [2, 4, 8]
        .iter()
        .map(|&n| fsl_bounds_check(&s.a, &OneLevelAs::new(dec(&p, &s, n), &s.a).unwrap()).unwrap().c_t)
        .collect();
    assert!(c_t[0] > c_t[1] && c_t[1] > c_t[2], "{c_t:?}");
}
