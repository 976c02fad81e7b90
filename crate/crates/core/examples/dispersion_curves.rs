//! Phase velocity of P1..P3 finite and spectral elements against 1/G, as CSV.

use wavedd::bench::{dispersion_specs, emit_dispersion};
use wavedd::helmholtz::Scheme;

fn main() -> wavedd::Result<()> {
    let specs = dispersion_specs(&[1, 2, 3], &[Scheme::Fe, Scheme::Se])?;
    emit_dispersion(&specs, 16, std::io::stdout().lock())?;
    Ok(())
}
