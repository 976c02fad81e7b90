//! Right-preconditioned GMRES and preconditioned conjugate gradients.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{axpy, dot, is_finite, norm2, zeros, LinearOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KrylovVariant {
    Gmres,
    Cg,
}

/// Stopping rule and method choice. The tolerance applies to the true
/// relative residual `‖b − Ax‖/‖b‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// `None` runs full GMRES. Ignored by CG.
    pub restart: Option<usize>,
    pub variant: KrylovVariant,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 500, restart: None, variant: KrylovVariant::Gmres }
    }
}

impl KrylovConfig {
    pub fn gmres(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn cg(tol: f64) -> Self {
        Self { tol, variant: KrylovVariant::Cg, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tol {} outside (0,1)", self.tol)));
        }
        if self.restart == Some(0) {
            return Err(Error::Config("restart must be >= 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual per iteration, starting with the initial residual 1.
    /// GMRES records the Arnoldi estimate, CG the recursively updated residual.
    pub residual_history: Vec<f64>,
    /// True relative residual of the returned iterate.
    pub final_residual: f64,
}

/// The identity map, standing in for "no preconditioner".
#[derive(Debug, Clone, Copy)]
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(x);
    }
}

pub fn krylov_solve(
    a: &dyn LinearOperator,
    m_inv: Option<&dyn LinearOperator>,
    b: &[C64],
    cfg: &KrylovConfig,
) -> Result<SolveOutcome> {
    match cfg.variant {
        KrylovVariant::Gmres => gmres(a, m_inv, b, cfg),
        KrylovVariant::Cg => cg(a, m_inv, b, cfg),
    }
}

fn check_dims(a: &dyn LinearOperator, m: Option<&dyn LinearOperator>, b: &[C64]) -> Result<()> {
    if a.dim() != b.len() || m.is_some_and(|m| m.dim() != b.len()) {
        return Err(Error::Structural("krylov: operator and rhs dimensions differ".into()));
    }
    Ok(())
}

fn true_residual(a: &dyn LinearOperator, x: &[C64], b: &[C64]) -> Vec<C64> {
    let mut r = a.apply_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    r
}

/// Complex Givens rotation zeroing `b` in `(a, b)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    if b.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

/// GMRES on `A M⁻¹ y = b` with `x = M⁻¹ y`, zero initial guess.
pub fn gmres(
    a: &dyn LinearOperator,
    m_inv: Option<&dyn LinearOperator>,
    b: &[C64],
    cfg: &KrylovConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_dims(a, m_inv, b)?;
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(SolveOutcome {
            x: zeros(n),
            iterations: 0,
            converged: true,
            residual_history: vec![0.0],
            final_residual: 0.0,
        });
    }
    let precondition = |v: &[C64]| -> Result<Vec<C64>> {
        let z = match m_inv {
            Some(m) => m.apply_vec(v),
            None => v.to_vec(),
        };
        if !is_finite(&z) {
            return Err(Error::Numeric("preconditioner returned non-finite values".into()));
        }
        Ok(z)
    };

    let mut x = zeros(n);
    let mut r = b.to_vec();
    let mut beta = bnorm;
    let mut history = vec![1.0];
    let mut total = 0usize;
    let cycle_len = cfg.restart.unwrap_or(cfg.max_iter).min(cfg.max_iter);

    loop {
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(cycle_len + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // h[j] is column j of the Hessenberg matrix, already rotated
        let mut h: Vec<Vec<C64>> = Vec::with_capacity(cycle_len);
        let mut rot: Vec<(f64, C64)> = Vec::with_capacity(cycle_len);
        let mut g = vec![C64::new(beta, 0.0)];
        let mut breakdown = false;

        while h.len() < cycle_len && total < cfg.max_iter {
            let j = h.len();
            let z = precondition(&basis[j])?;
            let mut w = a.apply_vec(&z);
            if !is_finite(&w) {
                return Err(Error::Numeric("operator returned non-finite values".into()));
            }
            let wnorm0 = norm2(&w);
            let mut col = vec![C64::new(0.0, 0.0); j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                col[i] = hij;
                axpy(-hij, v, &mut w);
            }
            // one reorthogonalization pass when cancellation was severe
            if norm2(&w) < 0.5 * wnorm0 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(v, &w);
                    col[i] += c;
                    axpy(-c, v, &mut w);
                }
            }
            let hnext = norm2(&w);
            col[j + 1] = C64::new(hnext, 0.0);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let t = c * col[i] + s * col[i + 1];
                col[i + 1] = -s.conj() * col[i] + c * col[i + 1];
                col[i] = t;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = C64::new(0.0, 0.0);
            g.push(-s.conj() * g[j]);
            g[j] *= c;
            rot.push((c, s));
            h.push(col);
            total += 1;
            let est = g[j + 1].norm() / bnorm;
            history.push(est);
            if est <= cfg.tol {
                break;
            }
            if hnext <= 1e-14 * wnorm0.max(f64::MIN_POSITIVE) {
                breakdown = true;
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }

        // back substitution on the rotated triangular system
        let k = h.len();
        let mut y = vec![C64::new(0.0, 0.0); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for l in i + 1..k {
                s -= h[l][i] * y[l];
            }
            y[i] = if h[i][i].norm() > 0.0 { s / h[i][i] } else { C64::new(0.0, 0.0) };
        }
        let mut u = zeros(n);
        for (yi, v) in y.iter().zip(&basis) {
            axpy(*yi, v, &mut u);
        }
        let du = precondition(&u)?;
        axpy(C64::new(1.0, 0.0), &du, &mut x);
        r = true_residual(a, &x, b);
        beta = norm2(&r);
        let rel = beta / bnorm;
        if rel <= cfg.tol || total >= cfg.max_iter || breakdown || k == 0 {
            return Ok(SolveOutcome {
                x,
                iterations: total,
                converged: rel <= cfg.tol,
                residual_history: history,
                final_residual: rel,
            });
        }
    }
}

/// Preconditioned CG; `A` and `M⁻¹` must be Hermitian positive definite.
pub fn cg(
    a: &dyn LinearOperator,
    m_inv: Option<&dyn LinearOperator>,
    b: &[C64],
    cfg: &KrylovConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_dims(a, m_inv, b)?;
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(SolveOutcome {
            x: zeros(n),
            iterations: 0,
            converged: true,
            residual_history: vec![0.0],
            final_residual: 0.0,
        });
    }
    let precondition = |v: &[C64]| -> Result<Vec<C64>> {
        let z = match m_inv {
            Some(m) => m.apply_vec(v),
            None => v.to_vec(),
        };
        if !is_finite(&z) {
            return Err(Error::Numeric("preconditioner returned non-finite values".into()));
        }
        Ok(z)
    };
    let mut x = zeros(n);
    let mut r = b.to_vec();
    let mut z = precondition(&r)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut history = vec![1.0];
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let q = a.apply_vec(&p);
        let pq = dot(&p, &q);
        if !(pq.re.is_finite() && pq.im.is_finite()) {
            return Err(Error::Numeric("CG curvature is non-finite".into()));
        }
        if pq.norm() == 0.0 {
            break;
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        iterations += 1;
        let rel = norm2(&r) / bnorm;
        history.push(rel);
        if rel <= cfg.tol {
            break;
        }
        z = precondition(&r)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    let rel = norm2(&true_residual(a, &x, b)) / bnorm;
    Ok(SolveOutcome { x, iterations, converged: rel <= cfg.tol, residual_history: history, final_residual: rel })
}
