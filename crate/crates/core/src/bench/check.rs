use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Method, ModelSpec, ProblemKind, RunConfig};
use super::run::run_case;
use crate::dd::{decompose, OverlapMode, OverlapSpec, PartitionShape};
use crate::error::Result;
use crate::helmholtz::{build_rect_mesh, phase_velocity, refine_uniform, ElementOrder, Scheme};
use crate::maxwell::{assemble_maxwell, fsl_bounds_check, MaxwellProblem};
use crate::numkit::{lu_factorize, ComplexSparseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: format!("error: {e}") },
    }
}

fn pou() -> Result<(bool, String)> {
    let coarse = build_rect_mesh(1.0, 1.0, 6, 6, ElementOrder::P2)?;
    let fine = refine_uniform(&coarse, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..6 {
        let n = rng.random_range(2..=9);
        let mode = if rng.random_bool(0.5) { OverlapMode::Minimum } else { OverlapMode::Coarse };
        let d = decompose(&fine, &fine, n, PartitionShape::Auto, OverlapSpec { mode, layers: rng.random_range(1..=2) })?;
        worst = worst.max(d.pou_defect());
    }
    Ok((worst <= 1e-14, format!("max defect {worst:.1e}")))
}

fn small_helmholtz(method: Method, n: usize) -> RunConfig {
    RunConfig { frequency: 2.0, cells: 6, subdomains: n, method, tol: 1e-10, ..RunConfig::default() }
}

fn exact_oras() -> Result<(bool, String)> {
    let rep = run_case(&small_helmholtz(Method::OneLevel, 1))?;
    Ok((rep.converged && rep.iterations == 1, format!("{} iteration(s)", rep.iterations)))
}

fn kernel() -> Result<(bool, String)> {
    let mesh = refine_uniform(&build_rect_mesh(1.0, 1.0, 3, 3, ElementOrder::P1)?, 1)?;
    let p = MaxwellProblem::with_permittivity(mesh, 1.0, |x, y| 1.0 + 10.0 * x * y)?;
    let sys = assemble_maxwell(&p)?;
    let kc = sys.k.matmul(&sys.c)?;
    let rel = kc.max_abs() / sys.k.max_abs();
    Ok((rel <= 1e-13, format!("|KC|/|K| = {rel:.1e}")))
}

fn dispersion() -> Result<(bool, String)> {
    let v = phase_velocity(2, Scheme::Fe, 10.0)?;
    Ok(((v - 1.0).abs() <= 1e-2, format!("P2 at G=10: v = {v:.6}")))
}

fn round_trip() -> Result<(bool, String)> {
    let cfg = RunConfig {
        problem: ProblemKind::Maxwell,
        model: ModelSpec::Channels(1e4),
        method: Method::GeneoComplement,
        source: Some([0.25, 0.5]),
        restart: Some(30),
        ..RunConfig::default()
    };
    let back = RunConfig::parse(&cfg.render())?;
    Ok((back == cfg, "parse(render(c)) == c".into()))
}

fn oracle() -> Result<(bool, String)> {
    let cfg = RunConfig { tol: 1e-8, ..small_helmholtz(Method::Dtn, 4) };
    let case = super::run::helmholtz_case(&cfg)?;
    let (m, _, _) = super::run::helmholtz_preconditioner(&cfg, &case)?;
    let sol = crate::numkit::krylov_solve(&case.system.a, Some(&*m), &case.system.b, &crate::numkit::KrylovConfig::gmres(cfg.tol))?;
    let direct = lu_factorize(&case.system.a)?.solve(&case.system.b);
    let err = crate::numkit::relative_error(&sol.x, &direct);
    Ok((err <= 10.0 * cfg.tol, format!("relative error {err:.1e}")))
}

fn fsl_identity() -> Result<(bool, String)> {
    let mesh = build_rect_mesh(1.0, 1.0, 6, 6, ElementOrder::P1)?;
    let p = MaxwellProblem::with_permittivity(mesh, 1.0, |_, _| 1.0)?;
    let sys = assemble_maxwell(&p)?;
    let exact = lu_factorize(&sys.a)?;
    let f = fsl_bounds_check(&sys.a, &exact)?;
    let dev = f.eigenvalues.iter().map(|z| (z - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max);
    Ok((dev <= 1e-12, format!("max |λ−1| = {dev:.1e}")))
}

fn symmetric() -> Result<(bool, String)> {
    let cfg = small_helmholtz(Method::OneLevel, 1);
    let case = super::run::helmholtz_case(&cfg)?;
    let a: &ComplexSparseMatrix = &case.system.a;
    let defect = a.linear_combination(C64::new(1.0, 0.0), &a.transpose(), C64::new(-1.0, 0.0))?.max_abs() / a.max_abs();
    Ok((defect <= 1e-13, format!("|A − Aᵀ|/|A| = {defect:.1e}")))
}

/// The built-in invariant suite behind `wavedd check`.
pub fn run_checks() -> Vec<CheckResult> {
    vec![
        check("partition-of-unity", pou),
        check("helmholtz-complex-symmetric", symmetric),
        check("oras-single-domain-exact", exact_oras),
        check("krylov-vs-direct", oracle),
        check("maxwell-kernel", kernel),
        check("maxwell-fsl-identity", fsl_identity),
        check("dispersion-p2-g10", dispersion),
        check("config-round-trip", round_trip),
    ]
}
