use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dd::{Decomposition, HelmholtzLocal};
use crate::error::{Error, Result};
use crate::numkit::{lu_factorize, Factorization, LinearOperator};

/// Optimized restricted additive Schwarz: `Σ_j R_jᵀ D_j B_j⁻¹ R_j` with
/// impedance-conditioned local matrices `B_j`.
pub struct OneLevelOras {
    decomposition: Decomposition,
    factors: Vec<Factorization>,
}

impl OneLevelOras {
    pub fn new(decomposition: Decomposition, locals: &[HelmholtzLocal]) -> Result<Self> {
        if locals.len() != decomposition.len() {
            return Err(Error::Structural(format!("{} local problems for {} subdomains", locals.len(), decomposition.len())));
        }
        let factors = locals
            .par_iter()
            .enumerate()
            .map(|(j, l)| {
                lu_factorize(&l.robin).map_err(|e| match e {
                    Error::Singular(msg) => Error::Singular(format!("subdomain {j}: {msg}")),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { decomposition, factors })
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }
}

impl LinearOperator for OneLevelOras {
    fn dim(&self) -> usize {
        self.decomposition.n_dofs
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let local: Vec<Vec<C64>> = self
            .decomposition
            .subdomains
            .par_iter()
            .zip(&self.factors)
            .map(|(s, f)| {
                let mut r = s.restrict(x);
                f.solve_in_place(&mut r);
                r
            })
            .collect();
        y.fill(C64::new(0.0, 0.0));
        // fixed accumulation order keeps results bitwise reproducible
        for (s, u) in self.decomposition.subdomains.iter().zip(&local) {
            s.prolong_weighted_add(u, y);
        }
    }
}
