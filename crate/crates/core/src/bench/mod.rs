//! Benchmark driver: configurations, single runs, frequency × subdomain
//! sweeps, dispersion tables and a self-check suite. The `wavedd` binary is
//! a thin shell over this module.

mod check;
mod config;
mod run;
mod sweep;

pub use check::{run_checks, CheckResult};

pub use config::{Method, ModelSpec, ProblemKind, RunConfig};
pub use run::{helmholtz_case, helmholtz_coarse, helmholtz_preconditioner, meshes, run_case, velocity_model, HelmholtzCase, SolveReport};
pub use sweep::{dispersion_specs, emit_dispersion, read_dispersion, run_sweep, write_sweep_csv, CellStatus, DispersionRow, SweepRow};

use crate::dd::{decompose, Decomposition, OverlapSpec};
use crate::error::{Error, Result};
use crate::helmholtz::ElementOrder;
use crate::maxwell::{
    assemble_maxwell, build_free_cs, build_geneo_complement_cs, channel_permittivity, random_load, Asp, EdgeSpace, MaxwellProblem,
    MaxwellSystem, OneLevelAs,
};
use crate::numkit::{LinearOperator, C64};
use crate::precond::TwoLevel;

/// Maxwell meshes default to this many coarse cells along x.
pub const MAXWELL_DEFAULT_CELLS: usize = 16;

pub struct MaxwellCase {
    pub problem: MaxwellProblem,
    pub system: MaxwellSystem,
    pub decomposition: Decomposition,
    pub rhs: Vec<C64>,
}

pub fn maxwell_case(cfg: &RunConfig) -> Result<MaxwellCase> {
    let contrast = match cfg.model {
        ModelSpec::Channels(c) => c,
        ModelSpec::Constant(c) => c,
        _ => return Err(Error::Config("Maxwell problems take a constant or channels model".into())),
    };
    let mut geo = cfg.clone();
    geo.order = ElementOrder::P1;
    if geo.cells == 0 {
        geo.cells = MAXWELL_DEFAULT_CELLS;
    }
    let (_, mesh) = meshes(&geo, 1.0)?;
    let problem = match cfg.model {
        ModelSpec::Constant(_) => MaxwellProblem::with_permittivity(mesh, cfg.alpha, |_, _| contrast)?,
        _ => MaxwellProblem::with_permittivity(mesh, cfg.alpha, channel_permittivity(cfg.width, cfg.height, contrast))?,
    };
    let system = assemble_maxwell(&problem)?;
    let space: &EdgeSpace = &system.space;
    let spec = OverlapSpec { mode: cfg.overlap, layers: cfg.overlap_layers };
    let decomposition = decompose(&problem.mesh, space, cfg.subdomains, cfg.partition, spec)?;
    let rhs = random_load(space.n_edges(), cfg.seed);
    Ok(MaxwellCase { problem, system, decomposition, rhs })
}

pub fn maxwell_preconditioner(cfg: &RunConfig, case: &MaxwellCase) -> Result<(Box<dyn LinearOperator>, usize, Vec<String>)> {
    let a = &case.system.a;
    let one = || OneLevelAs::new(case.decomposition.clone(), a);
    let cs = match cfg.method {
        Method::OneLevel => return Ok((Box::new(one()?), 0, Vec::new())),
        Method::Asp => return Ok((Box::new(Asp::new(&case.system)?), 0, Vec::new())),
        Method::FreeCs => build_free_cs(&case.decomposition, &case.system)?,
        Method::GeneoComplement => build_geneo_complement_cs(&case.decomposition, &case.problem, &case.system, cfg.tau, cfg.modes)?,
        other => return Err(Error::Config(format!("method {other} is not a Maxwell preconditioner"))),
    };
    let (dim, notes) = (cs.dim(), cs.warnings.clone());
    Ok((Box::new(TwoLevel::new(one()?, cs, a.clone(), cfg.mode)?), dim, notes))
}
