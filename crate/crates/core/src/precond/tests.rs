use faer::Mat;
use num_complex::Complex64 as C64;

use super::*;
use crate::dd::{assemble_local_matrices, decompose, Decomposition, HelmholtzLocal, OverlapSpec, PartitionShape};
use crate::helmholtz::{
    assemble_helmholtz, build_rect_mesh, refine_uniform, AssembledSystem, ElementOrder, HelmholtzProblem, Mesh, OuterBc, Source,
    VelocityModel,
};
use crate::numkit::{krylov_solve, lu_factorize, operator_to_dense, KrylovConfig, LinearOperator};

struct Setup {
    problem: HelmholtzProblem,
    sys: AssembledSystem,
    dec: Decomposition,
    locals: Vec<HelmholtzLocal>,
}

fn setup(mesh: Mesh, omega: f64, n: usize, shape: PartitionShape) -> Setup {
    let src = Source::Point { x: 0.5 * mesh.width(), y: 0.9 * mesh.height(), amplitude: C64::new(1.0, 0.0) };
    let problem = HelmholtzProblem::new(mesh, VelocityModel::Constant(1.0), omega, src, OuterBc::Impedance).unwrap();
    let sys = assemble_helmholtz(&problem).unwrap();
    let dec = decompose(&problem.mesh, &problem.mesh, n, shape, OverlapSpec::default()).unwrap();
    let locals = assemble_local_matrices(&dec, &problem, &sys.a).unwrap();
    Setup { problem, sys, dec, locals }
}

fn square(nx: usize, order: ElementOrder) -> Mesh {
    build_rect_mesh(1.0, 1.0, nx, nx, order).unwrap()
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

fn gmres_iters(s: &Setup, m: &dyn LinearOperator, tol: f64) -> usize {
    let out = krylov_solve(&s.sys.a, Some(m), &s.sys.b, &KrylovConfig::gmres(tol)).unwrap();
    assert!(out.converged);
    out.iterations
}

#[test]
fn single_subdomain_oras_is_exact() {
    let s = setup(square(10, ElementOrder::P2), 12.0, 1, PartitionShape::Strips);
    let m = OneLevelOras::new(s.dec.clone(), &s.locals).unwrap();
    assert_eq!(gmres_iters(&s, &m, 1e-10), 1);
    let z = m.apply_vec(&vec![C64::new(0.0, 0.0); m.dim()]);
    assert!(z.iter().all(|v| *v == C64::new(0.0, 0.0)));
}

#[test]
fn oras_matches_dense_assembly() {
    let s = setup(square(6, ElementOrder::P1), 6.0, 2, PartitionShape::Strips);
    let m = OneLevelOras::new(s.dec.clone(), &s.locals).unwrap();
    let got = operator_to_dense(&m);
    let n = s.dec.n_dofs;
    let mut want = Mat::<C64>::zeros(n, n);
    for (sub, loc) in s.dec.subdomains.iter().zip(&s.locals) {
        let binv = lu_factorize(&loc.robin).unwrap();
        for (c, &gc) in sub.dofs.iter().enumerate() {
            let mut e = vec![C64::new(0.0, 0.0); sub.len()];
            e[c] = C64::new(1.0, 0.0);
            let col = binv.solve(&e);
            for (r, &gr) in sub.dofs.iter().enumerate() {
                want[(gr, gc)] += col[r] * sub.weights[r];
            }
        }
    }
    assert!(max_diff(&got, &want) <= 1e-12 * max_abs(&want));
}

#[test]
fn grid_interpolation_reproduces_linears() {
    let coarse = build_rect_mesh(2.0, 1.0, 4, 2, ElementOrder::P2).unwrap();
    let fine = refine_uniform(&coarse, 2).unwrap();
    let z = interpolation_matrix(&coarse, &fine).unwrap();
    for f in [|_: [f64; 2]| 1.0, |p: [f64; 2]| p[0], |p: [f64; 2]| p[0] * p[1] - p[1] * p[1]] {
        let c: Vec<C64> = coarse.dof_coords().iter().map(|&p| C64::new(f(p), 0.0)).collect();
        let got = z.mul_vec(&c);
        for (g, p) in got.iter().zip(fine.dof_coords()) {
            assert!((g - C64::new(f(p), 0.0)).norm() < 1e-14);
        }
    }
    let other = build_rect_mesh(2.0, 1.0, 3, 2, ElementOrder::P2).unwrap();
    assert!(interpolation_matrix(&other, &fine).is_err());
}

#[test]
fn full_coarse_space_collapses_hybrid() {
    let s = setup(square(8, ElementOrder::P2), 10.0, 4, PartitionShape::Grid(2, 2));
    let cs = build_grid_cs(&s.problem.mesh, &s.problem.mesh, &s.sys.a).unwrap();
    assert_eq!(cs.dim(), s.dec.n_dofs);
    let m = OneLevelOras::new(s.dec.clone(), &s.locals).unwrap();
    let t = TwoLevel::new(m, cs, s.sys.a.clone(), TwoLevelMode::Hybrid).unwrap();
    assert_eq!(gmres_iters(&s, &t, 1e-10), 1);
}

#[test]
fn coarse_projection_and_exactness() {
    let coarse = build_rect_mesh(1.0, 1.0, 2, 2, ElementOrder::P1).unwrap();
    let fine = refine_uniform(&coarse, 2).unwrap();
    let s = setup(fine, 8.0, 4, PartitionShape::Grid(2, 2));
    let cs = build_grid_cs(&s.problem.mesh, &coarse, &s.sys.a).unwrap();
    let h = operator_to_dense(&cs);
    let a = s.sys.a.to_dense();
    let hah = &h * &a * &h;
    assert!(max_diff(&hah, &h) <= 1e-12 * max_abs(&h));

    let z = cs.basis().to_dense();
    let m = OneLevelOras::new(s.dec.clone(), &s.locals).unwrap();
    let t = TwoLevel::new(m, cs, s.sys.a.clone(), TwoLevelMode::Hybrid).unwrap();
    for j in 0..z.ncols() {
        let col: Vec<C64> = (0..z.nrows()).map(|i| z[(i, j)]).collect();
        let back = t.apply_vec(&s.sys.a.mul_vec(&col));
        let err: f64 = back.iter().zip(&col).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "column {j}: {err}");
    }
}

#[test]
fn empty_coarse_space_is_one_level() {
    let s = setup(square(8, ElementOrder::P1), 8.0, 4, PartitionShape::Grid(2, 2));
    let sel = EigenSelection { rule: SelectionRule::Above(f64::INFINITY), cap: 20 };
    let cs = build_hgeneo_cs(&s.dec, &s.locals, &s.sys, &sel).unwrap();
    assert!(cs.is_empty());
    let v: Vec<C64> = (0..s.dec.n_dofs).map(|i| C64::new((i as f64).sin(), 1.0)).collect();
    let m = OneLevelOras::new(s.dec.clone(), &s.locals).unwrap();
    let one = m.apply_vec(&v);
    for mode in [TwoLevelMode::Additive, TwoLevelMode::Hybrid] {
        let t = TwoLevel::new(OneLevelOras::new(s.dec.clone(), &s.locals).unwrap(), CoarseSpace::empty(v.len(), Provenance::HGeneo), s.sys.a.clone(), mode).unwrap();
        assert_eq!(t.apply_vec(&v), one);
    }
}

#[test]
fn dtn_laplace_limit_matches_analytic_modes() {
    // two strips on [0,2]x[0,1]; subdomain 0 spans [0, 1+h] with the
    // interface on x = 1+h and natural conditions elsewhere
    let nx = 24;
    let mesh = build_rect_mesh(2.0, 1.0, 2 * nx, nx, ElementOrder::P2).unwrap();
    let s = setup(mesh, 0.0, 2, PartitionShape::Strips);
    let sel = EigenSelection { rule: SelectionRule::BelowWavenumber, cap: 4 };
    let mut loc = s.locals[0].clone();
    loc.k_max = 100.0;
    let d = dtn_eigenpairs(0, &s.dec.subdomains[0], &loc, &sel).unwrap().unwrap();
    let mut lam: Vec<f64> = d.pairs.iter().map(|p| p.value.re).collect();
    lam.sort_by(f64::total_cmp);
    let a = 1.0 + 1.0 / nx as f64;
    assert!(lam[0].abs() < 1e-8);
    for m in 1..=3 {
        let mp = m as f64 * std::f64::consts::PI;
        let exact = mp * (mp * a).tanh();
        assert!((lam[m] - exact).abs() <= 0.05 * exact, "mode {m}: {} vs {exact}", lam[m]);
    }
    // nothing falls below k_j = 0
    let cs = build_dtn_cs(&s.dec, &s.locals, &s.sys.a, &EigenSelection::dtn()).unwrap();
    assert!(cs.is_empty());
}

#[test]
fn dtn_selection_is_monotone_in_k() {
    let s = setup(square(12, ElementOrder::P1), 15.0, 4, PartitionShape::Grid(2, 2));
    let sub = &s.dec.subdomains[3];
    let mut loc = s.locals[3].clone();
    let sel = EigenSelection { rule: SelectionRule::BelowWavenumber, cap: 100 };
    let small: Vec<C64> = dtn_eigenpairs(3, sub, &loc, &sel).unwrap().unwrap().pairs.iter().map(|p| p.value).collect();
    loc.k_max *= 2.0;
    let big: Vec<C64> = dtn_eigenpairs(3, sub, &loc, &sel).unwrap().unwrap().pairs.iter().map(|p| p.value).collect();
    assert!(!small.is_empty() && big.len() > small.len());
    for v in &small {
        assert!(big.iter().any(|w| (w - v).norm() < 1e-9 * v.norm().max(1.0)));
    }
}

#[test]
fn hgeneo_poisson_limit_has_real_spectrum() {
    let s = setup(square(8, ElementOrder::P1), 0.0, 4, PartitionShape::Grid(2, 2));
    let sel = EigenSelection { rule: SelectionRule::Largest(10), cap: 10 };
    let sub = &s.dec.subdomains[0];
    let mut lhs = s.sys.laplacian.principal_submatrix(&sub.dofs).to_dense();
    scale_for_test(&mut lhs, &sub.weights);
    let pairs = crate::numkit::dense_generalized_eig(
        &lhs,
        &s.locals[0].neumann.to_dense(),
        crate::numkit::EigSelection::LargestRe(10),
        &Default::default(),
    )
    .unwrap();
    assert!(!pairs.is_empty());
    assert!(pairs.iter().all(|p| p.value.im.abs() < 1e-10 && p.value.re > -1e-10));
    let cs = build_hgeneo_cs(&s.dec, &s.locals, &s.sys, &sel).unwrap();
    assert!(cs.dim() > 0);
}

fn scale_for_test(m: &mut Mat<C64>, d: &[f64]) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m[(i, j)] *= d[i] * d[j];
        }
    }
}

fn assert_orthonormal(cs: &CoarseSpace) {
    let z = cs.basis().to_dense();
    let g = z.adjoint() * &z;
    let eye = Mat::<C64>::identity(z.ncols(), z.ncols());
    assert!(max_diff(&g, &eye) < 1e-10);
    assert!(cs.condition_number().unwrap() < 1e12);
}

fn assert_helps(s: &Setup, cs: CoarseSpace) {
    assert!(cs.dim() > 0, "{:?}", cs.provenance);
    assert_orthonormal(&cs);
    let one = gmres_iters(s, &OneLevelOras::new(s.dec.clone(), &s.locals).unwrap(), 1e-6);
    let prov = cs.provenance;
    let t = TwoLevel::new(OneLevelOras::new(s.dec.clone(), &s.locals).unwrap(), cs, s.sys.a.clone(), TwoLevelMode::Hybrid).unwrap();
    let two = gmres_iters(s, &t, 1e-6);
    assert!(two < one, "{prov:?}: {two} vs one-level {one}");
}

#[test]
fn spectral_spaces_are_orthonormal_and_help() {
    let s = setup(square(16, ElementOrder::P1), 16.0, 4, PartitionShape::Auto);
    assert_helps(&s, build_dtn_cs(&s.dec, &s.locals, &s.sys.a, &EigenSelection::dtn()).unwrap());
    assert_helps(&s, build_hgeneo_cs(&s.dec, &s.locals, &s.sys, &EigenSelection::hgeneo()).unwrap());
    // the positive surrogate is a low-frequency method
    let s = setup(square(16, ElementOrder::P1), 2.0 * std::f64::consts::PI, 16, PartitionShape::Auto);
    assert_helps(&s, build_deltageneo_cs(&s.dec, &s.problem, &s.sys, &EigenSelection::geneo()).unwrap());
}

#[test]
fn deltageneo_spectrum_is_real_nonnegative() {
    let s = setup(square(8, ElementOrder::P1), 6.0, 4, PartitionShape::Grid(2, 2));
    let sub = &s.dec.subdomains[1];
    let pos = s.sys.laplacian.linear_combination(C64::new(1.0, 0.0), &s.sys.weighted_mass, C64::new(1.0, 0.0)).unwrap();
    let mut lhs = pos.principal_submatrix(&sub.dofs).to_dense();
    scale_for_test(&mut lhs, &sub.weights);
    let local_of = sub.local_index(s.dec.n_dofs);
    let rhs = crate::dd::local_operator(&s.problem, &s.dec, 1, crate::helmholtz::assembly::OperatorTerms::POSITIVE, &local_of)
        .unwrap()
        .to_dense();
    let pairs = crate::numkit::dense_generalized_eig(&lhs, &rhs, crate::numkit::EigSelection::All, &Default::default()).unwrap();
    assert_eq!(pairs.len(), sub.len());
    assert!(pairs.iter().all(|p| p.value.im.abs() < 1e-10 && p.value.re > -1e-10));
}
