//! One-level ORAS on a homogeneous unit square: iterations grow with the
//! number of subdomains.

use wavedd::bench::{run_case, Method, RunConfig};

fn main() -> wavedd::Result<()> {
    let base = RunConfig { frequency: 5.0, ppwl: 10.0, method: Method::OneLevel, ..RunConfig::default() };
    println!("{:>4} {:>7} {:>6}", "N", "dofs", "iters");
    for n in [1, 4, 16, 64] {
        let r = run_case(&RunConfig { subdomains: n, ..base.clone() })?;
        println!("{n:>4} {:>7} {:>6}", r.dofs, r.iterations);
    }
    Ok(())
}
