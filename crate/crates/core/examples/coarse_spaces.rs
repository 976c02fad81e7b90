//! All Helmholtz coarse spaces on a three-layer wedge, side by side.

use wavedd::bench::{run_case, Method, ModelSpec, RunConfig};
use wavedd::helmholtz::ElementOrder;

fn main() -> wavedd::Result<()> {
    let cfg = RunConfig {
        model: ModelSpec::Wedge([1.0, 2.5, 5.0]),
        width: 3.0,
        height: 1.0,
        frequency: 3.0,
        order: ElementOrder::P2,
        subdomains: 8,
        ..RunConfig::default()
    };
    println!("{:<12} {:>6} {:>6} {:>8}", "method", "iters", "n0", "setup_s");
    for m in [Method::OneLevel, Method::Grid, Method::Dtn, Method::HGeneo, Method::DeltaGeneo] {
        let r = run_case(&RunConfig { method: m, ..cfg.clone() })?;
        println!("{:<12} {:>6} {:>6} {:>8.2}", m.as_str(), r.iterations, r.coarse_dim, r.setup_seconds);
    }
    Ok(())
}
