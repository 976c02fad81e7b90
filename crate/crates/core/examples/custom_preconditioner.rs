//! Building blocks by hand: assemble, decompose, build a DtN coarse space
//! and drive GMRES directly.

use wavedd::dd::{assemble_local_matrices, decompose, OverlapSpec, PartitionShape};
use wavedd::helmholtz::{assemble_helmholtz, build_rect_mesh, ElementOrder, HelmholtzProblem, OuterBc, Source, VelocityModel, WedgeModel};
use wavedd::numkit::{krylov_solve, KrylovConfig, C64};
use wavedd::precond::{build_dtn_cs, EigenSelection, OneLevelOras, TwoLevel, TwoLevelMode};

fn main() -> wavedd::Result<()> {
    let mesh = build_rect_mesh(2.0, 1.0, 60, 30, ElementOrder::P2)?;
    let model = VelocityModel::LayeredWedge(WedgeModel::new(2.0, 1.0, [1.0, 2.0, 3.0]));
    let src = Source::Point { x: 1.0, y: 0.9, amplitude: C64::new(1.0, 0.0) };
    let problem = HelmholtzProblem::new(mesh, model, 2.0 * std::f64::consts::PI * 4.0, src, OuterBc::Impedance)?;
    let sys = assemble_helmholtz(&problem)?;
    let dec = decompose(&problem.mesh, &problem.mesh, 8, PartitionShape::Auto, OverlapSpec::default())?;
    let locals = assemble_local_matrices(&dec, &problem, &sys.a)?;

    let cs = build_dtn_cs(&dec, &locals, &sys.a, &EigenSelection::dtn())?;
    println!("DtN coarse dimension {}", cs.dim());
    let m = TwoLevel::new(OneLevelOras::new(dec, &locals)?, cs, sys.a.clone(), TwoLevelMode::Hybrid)?;
    let out = krylov_solve(&sys.a, Some(&m), &sys.b, &KrylovConfig::gmres(1e-8))?;
    println!("{} iterations, converged {}, residual {:.2e}", out.iterations, out.converged, out.final_residual);
    Ok(())
}
