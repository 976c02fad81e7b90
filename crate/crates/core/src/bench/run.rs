use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::config::{Method, ModelSpec, ProblemKind, RunConfig};
use crate::dd::{assemble_local_matrices, decompose, Decomposition, HelmholtzLocal, OverlapSpec};
use crate::error::{Error, Result};
use crate::helmholtz::velocity::{synthetic_section, RasterModel};
use crate::helmholtz::{
    assemble_helmholtz, build_rect_mesh, load_raster_model, refine_uniform, AssembledSystem, HelmholtzProblem, Mesh, Source,
    VelocityModel, WedgeModel,
};
use crate::numkit::{krylov_solve, KrylovConfig, LinearOperator};
use crate::precond::{
    build_deltageneo_cs, build_dtn_cs, build_grid_cs, build_hgeneo_cs, CoarseSpace, EigenSelection, OneLevelOras,
    SelectionRule, TwoLevel,
};

/// Outcome of one benchmark case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub dofs: usize,
    pub coarse_dim: usize,
    /// Non-fatal notes from the preconditioner build.
    pub warnings: Vec<String>,
    pub config: RunConfig,
}

/// Velocity model on the configured domain.
pub fn velocity_model(cfg: &RunConfig) -> Result<VelocityModel> {
    let (w, h) = (cfg.width, cfg.height);
    let m = match &cfg.model {
        ModelSpec::Constant(c) => VelocityModel::Constant(*c),
        ModelSpec::Wedge(s) => VelocityModel::LayeredWedge(WedgeModel::new(w, h, *s)),
        ModelSpec::Raster(path) => load_raster_model(path, w, h)?,
        ModelSpec::Synthetic { c_min, c_max } => {
            let (nx, ny) = (240, ((240.0 * h / w).round() as usize).max(2));
            let values = synthetic_section(nx, ny, *c_min, *c_max);
            VelocityModel::Raster(RasterModel::new(nx, ny, [0.0, w, 0.0, h], [w, h], values)?)
        }
        ModelSpec::Channels(_) => return Err(Error::Config("the channels model is for Maxwell problems".into())),
    };
    m.validate()?;
    Ok(m)
}

/// Coarse and fine meshes: the coarse mesh has `cells` cells along x (or
/// enough for `ppwl` on the fine mesh) and is refined `refine_levels` times.
pub fn meshes(cfg: &RunConfig, c_min: f64) -> Result<(Mesh, Mesh)> {
    let scale = 1usize << cfg.refine_levels;
    let (nx, ny) = if cfg.cells > 0 {
        (cfg.cells, ((cfg.cells as f64 * cfg.height / cfg.width).round() as usize).max(1))
    } else {
        let omega = cfg.omega();
        if omega <= 0.0 {
            return Err(Error::Config("cells must be given when frequency is 0".into()));
        }
        // DOF spacing h/p gives ppwl points per slowest wavelength
        let h = cfg.order.degree() as f64 * 2.0 * std::f64::consts::PI * c_min / (omega * cfg.ppwl);
        let fine = |len: f64| (len / h).ceil() as usize;
        (fine(cfg.width).div_ceil(scale).max(1), fine(cfg.height).div_ceil(scale).max(1))
    };
    let coarse = build_rect_mesh(cfg.width, cfg.height, nx, ny, cfg.order)?;
    let fine = if cfg.refine_levels > 0 { refine_uniform(&coarse, cfg.refine_levels)? } else { coarse.clone() };
    Ok((coarse, fine))
}

/// Everything a Helmholtz preconditioner is built from.
pub struct HelmholtzCase {
    pub coarse_mesh: Mesh,
    pub problem: HelmholtzProblem,
    pub system: AssembledSystem,
    pub decomposition: Decomposition,
    pub locals: Vec<HelmholtzLocal>,
}

pub fn helmholtz_case(cfg: &RunConfig) -> Result<HelmholtzCase> {
    let model = velocity_model(cfg)?;
    let (coarse_mesh, fine) = meshes(cfg, model.min_speed())?;
    let [x, y] = cfg.source_point();
    let source = Source::Point { x, y, amplitude: C64::new(1.0, 0.0) };
    let problem = HelmholtzProblem::new(fine, model, cfg.omega(), source, cfg.outer_bc)?;
    let system = assemble_helmholtz(&problem)?;
    let spec = OverlapSpec { mode: cfg.overlap, layers: cfg.overlap_layers };
    let decomposition = decompose(&problem.mesh, &problem.mesh, cfg.subdomains, cfg.partition, spec)?;
    let locals = assemble_local_matrices(&decomposition, &problem, &system.a)?;
    Ok(HelmholtzCase { coarse_mesh, problem, system, decomposition, locals })
}

fn selection(cfg: &RunConfig, rule: SelectionRule) -> EigenSelection {
    EigenSelection { rule, cap: cfg.modes }
}

/// Coarse space for `cfg.method`; `None` for the one-level method.
pub fn helmholtz_coarse(cfg: &RunConfig, case: &HelmholtzCase) -> Result<Option<CoarseSpace>> {
    let a = &case.system.a;
    let geneo = selection(cfg, SelectionRule::Above(cfg.lambda_min));
    let hgeneo = selection(cfg, SelectionRule::Deviation(cfg.lambda_min));
    Ok(Some(match cfg.method {
        Method::OneLevel => return Ok(None),
        Method::Grid => build_grid_cs(&case.problem.mesh, &case.coarse_mesh, a)?,
        Method::Dtn => build_dtn_cs(&case.decomposition, &case.locals, a, &selection(cfg, SelectionRule::BelowWavenumber))?,
        Method::HGeneo => build_hgeneo_cs(&case.decomposition, &case.locals, &case.system, &hgeneo)?,
        Method::DeltaGeneo => build_deltageneo_cs(&case.decomposition, &case.problem, &case.system, &geneo)?,
        other => return Err(Error::Config(format!("method {other} is not a Helmholtz preconditioner"))),
    }))
}

/// Preconditioner for a Helmholtz case plus its coarse dimension and notes.
pub fn helmholtz_preconditioner(cfg: &RunConfig, case: &HelmholtzCase) -> Result<(Box<dyn LinearOperator>, usize, Vec<String>)> {
    let oras = OneLevelOras::new(case.decomposition.clone(), &case.locals)?;
    match helmholtz_coarse(cfg, case)? {
        None => Ok((Box::new(oras), 0, Vec::new())),
        Some(cs) => {
            let (dim, notes) = (cs.dim(), cs.warnings.clone());
            Ok((Box::new(TwoLevel::new(oras, cs, case.system.a.clone(), cfg.mode)?), dim, notes))
        }
    }
}

fn krylov(cfg: &RunConfig) -> KrylovConfig {
    KrylovConfig { tol: cfg.tol, max_iter: cfg.max_iter, restart: cfg.restart, variant: cfg.krylov }
}

/// Builds the mesh, decomposition and preconditioner of `cfg`, solves, and
/// reports. Non-convergence is reported, not raised.
pub fn run_case(cfg: &RunConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let t0 = Instant::now();
    let (a, b, m, coarse_dim, warnings): (_, _, Box<dyn LinearOperator>, _, _) = match cfg.problem {
        ProblemKind::Helmholtz => {
            let case = helmholtz_case(cfg)?;
            let (m, dim, notes) = helmholtz_preconditioner(cfg, &case)?;
            (case.system.a, case.system.b, m, dim, notes)
        }
        ProblemKind::Maxwell => {
            let case = super::maxwell_case(cfg)?;
            let (m, dim, notes) = super::maxwell_preconditioner(cfg, &case)?;
            (case.system.a, case.rhs, m, dim, notes)
        }
    };
    let setup_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let out = krylov_solve(&a, Some(&*m), &b, &krylov(cfg))?;
    let solve_seconds = t1.elapsed().as_secs_f64();
    Ok(SolveReport {
        iterations: out.iterations,
        converged: out.converged,
        final_residual: out.final_residual,
        residual_history: out.residual_history,
        setup_seconds,
        solve_seconds,
        dofs: a.nrows(),
        coarse_dim,
        warnings,
        config: cfg.clone(),
    })
}
