//! Write a synthetic velocity raster, read it back and solve on it.

use wavedd::bench::{run_case, Method, ModelSpec, RunConfig};
use wavedd::helmholtz::velocity::{synthetic_section, write_raster};

fn main() -> wavedd::Result<()> {
    let (nx, ny) = (120, 40);
    let values = synthetic_section(nx, ny, 1500.0, 5500.0);
    let path = std::env::temp_dir().join("wavedd_section.vel");
    write_raster(std::fs::File::create(&path)?, nx, ny, [0.0, 3.0, 0.0, 1.0], "m/s", &values)?;

    let cfg = RunConfig {
        model: ModelSpec::Raster(path.clone()),
        width: 3.0,
        height: 1.0,
        frequency: 2.0,
        subdomains: 8,
        method: Method::Dtn,
        ..RunConfig::default()
    };
    let r = run_case(&cfg)?;
    println!("{}: {} dofs, {} iterations, coarse dim {}", path.display(), r.dofs, r.iterations, r.coarse_dim);
    Ok(())
}
