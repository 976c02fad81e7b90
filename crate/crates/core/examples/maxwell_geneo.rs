//! Positive Maxwell with permittivity channels: ASP and one-level AS degrade
//! with contrast, the two-level method with the free coarse space does not.

use wavedd::bench::{run_case, Method, ModelSpec, ProblemKind, RunConfig};
use wavedd::numkit::KrylovVariant;

fn main() -> wavedd::Result<()> {
    let base = RunConfig {
        problem: ProblemKind::Maxwell,
        alpha: 1e-2,
        subdomains: 8,
        krylov: KrylovVariant::Cg,
        ..RunConfig::default()
    };
    println!("{:>8} {:>10} {:>6} {:>8} {:>8}", "contrast", "one-level", "asp", "free-cs", "geneo");
    for contrast in [1.0, 1e2, 1e4] {
        let it = |m: Method| -> wavedd::Result<usize> {
            Ok(run_case(&RunConfig { model: ModelSpec::Channels(contrast), method: m, ..base.clone() })?.iterations)
        };
        println!(
            "{contrast:>8.0e} {:>10} {:>6} {:>8} {:>8}",
            it(Method::OneLevel)?,
            it(Method::Asp)?,
            it(Method::FreeCs)?,
            it(Method::GeneoComplement)?
        );
    }
    Ok(())
}
