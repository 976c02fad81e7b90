//! A small frequency × subdomain sweep written as CSV.

use wavedd::bench::{run_sweep, write_sweep_csv, Method, RunConfig};

fn main() -> wavedd::Result<()> {
    let rows = run_sweep(&RunConfig::default(), &[2.0, 4.0], &[4, 16], &[Method::OneLevel, Method::Grid, Method::Dtn]);
    write_sweep_csv(&rows, std::io::stdout().lock())
}
