//! Dense spectrum of the preconditioned Maxwell operator on a small mesh.

use wavedd::dd::{decompose, OverlapSpec, PartitionShape};
use wavedd::helmholtz::{build_rect_mesh, ElementOrder};
use wavedd::maxwell::{assemble_maxwell, build_geneo_complement_cs, channel_permittivity, fsl_bounds_check, Asp, MaxwellProblem, OneLevelAs};
use wavedd::numkit::LinearOperator;
use wavedd::precond::{TwoLevel, TwoLevelMode};

fn main() -> wavedd::Result<()> {
    for contrast in [1.0, 1e4] {
        let mesh = build_rect_mesh(1.0, 1.0, 12, 12, ElementOrder::P1)?;
        let p = MaxwellProblem::with_permittivity(mesh, 1.0, channel_permittivity(1.0, 1.0, contrast))?;
        let s = assemble_maxwell(&p)?;
        let d = decompose(&p.mesh, &s.space, 4, PartitionShape::Auto, OverlapSpec::default())?;
        let cs = build_geneo_complement_cs(&d, &p, &s, 10.0, 20)?;
        let two = TwoLevel::new(OneLevelAs::new(d.clone(), &s.a)?, cs, s.a.clone(), TwoLevelMode::Hybrid)?;
        let candidates: [(&str, Box<dyn LinearOperator>); 3] =
            [("one-level", Box::new(OneLevelAs::new(d, &s.a)?)), ("asp", Box::new(Asp::new(&s)?)), ("two-level", Box::new(two))];
        for (name, m) in candidates {
            let f = fsl_bounds_check(&s.a, &*m)?;
            println!("contrast {contrast:>6.0e} {name:<10} c_T {:.3e}  c_R {:.3e}  ratio {:>10.2}", f.c_t, f.c_r, f.ratio());
        }
    }
    Ok(())
}
