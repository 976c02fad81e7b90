//! Bloch-wave dispersion analysis of 1D order-`p` elements on a uniform grid.
//!
//! Resolution is counted per DOF spacing `h/p`, so a plane wave with
//! `G` points per wavelength has phase `θ = kh = 2πp/G` across one element.
//! The discrete frequencies solve the `p×p` Hermitian pencil
//! `K(θ)v = ω_h² M(θ)v`; the acoustic branch is unfolded by taking the
//! `⌈θ/π⌉`-th smallest eigenvalue.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{dense_generalized_eig, EigOptions, EigSelection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Consistent mass, exact Gauss quadrature.
    Fe,
    /// Mass lumped by Gauss–Lobatto quadrature on the interpolation nodes.
    Se,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Fe => "fe",
            Scheme::Se => "se",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fe" => Ok(Scheme::Fe),
            "se" => Ok(Scheme::Se),
            other => Err(Error::Config(format!("unknown scheme '{other}' (fe or se)"))),
        }
    }
}

/// One dispersion curve: order, scheme, and the coarsest resolution `g_min`
/// sampled (the curve covers `1/G ∈ (0, 1/g_min]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSpec {
    pub p: usize,
    pub scheme: Scheme,
    pub g_min: f64,
}

impl DispersionSpec {
    pub fn new(p: usize, scheme: Scheme) -> Self {
        Self { p, scheme, g_min: 2.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Config("element order must be >= 1".into()));
        }
        if !(self.g_min > 2.0) {
            return Err(Error::Domain(format!("G = {} at or below the Nyquist limit 2", self.g_min)));
        }
        Ok(())
    }
}

/// Legendre `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 { 0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1) } else { nf * (p0 - x * p1) / (1.0 - x * x) };
    (p1, dp)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        x.push(t);
        w.push(2.0 / ((1.0 - t * t) * dp * dp));
    }
    (x, w)
}

/// Gauss–Lobatto–Legendre nodes (ascending) and weights for `p+1` points.
pub fn gll(p: usize) -> (Vec<f64>, Vec<f64>) {
    let n = p + 1;
    let mut x = vec![0.0; n];
    x[0] = -1.0;
    x[p] = 1.0;
    for j in 1..p {
        let mut t = -(std::f64::consts::PI * j as f64 / p as f64).cos();
        // Newton on P'_p, with P''_p from the Legendre ODE
        for _ in 0..100 {
            let (pp, dp) = legendre(p, t);
            let ddp = (2.0 * t * dp - (p * (p + 1)) as f64 * pp) / (1.0 - t * t);
            let dt = dp / ddp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[j] = t;
    }
    let pf = p as f64;
    let w = x.iter().map(|&t| 2.0 / (pf * (pf + 1.0) * legendre(p, t).0.powi(2))).collect();
    (x, w)
}

/// Lagrange basis on `nodes` evaluated at `t`: values and derivatives.
fn lagrange(nodes: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut val = vec![0.0; n];
    let mut der = vec![0.0; n];
    for i in 0..n {
        let mut v = 1.0;
        for j in 0..n {
            if j != i {
                v *= (t - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
        val[i] = v;
        let mut d = 0.0;
        for m in 0..n {
            if m == i {
                continue;
            }
            let mut prod = 1.0 / (nodes[i] - nodes[m]);
            for j in 0..n {
                if j != i && j != m {
                    prod *= (t - nodes[j]) / (nodes[i] - nodes[j]);
                }
            }
            d += prod;
        }
        der[i] = d;
    }
    (val, der)
}

/// Element stiffness and mass on `[0, 1]` with GLL interpolation nodes.
fn element_matrices_1d(p: usize, scheme: Scheme) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (nodes, gll_w) = gll(p);
    let n = p + 1;
    let mut k = vec![vec![0.0; n]; n];
    let mut m = vec![vec![0.0; n]; n];
    let (qx, qw) = gauss_legendre(p + 1);
    for (&t, &w) in qx.iter().zip(&qw) {
        let (val, der) = lagrange(&nodes, t);
        for i in 0..n {
            for j in 0..n {
                // d/dx = 2 d/dξ and dx = dξ/2
                k[i][j] += w * der[i] * der[j] * 2.0;
                if scheme == Scheme::Fe {
                    m[i][j] += w * val[i] * val[j] * 0.5;
                }
            }
        }
    }
    if scheme == Scheme::Se {
        for i in 0..n {
            m[i][i] = 0.5 * gll_w[i];
        }
    }
    (k, m)
}

/// Normalized phase velocity `c_h/c` at `g` points per wavelength.
pub fn phase_velocity(p: usize, scheme: Scheme, g: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::Config("element order must be >= 1".into()));
    }
    if !(g > 2.0) || !g.is_finite() {
        return Err(Error::Domain(format!("G = {g} at or below the Nyquist limit 2")));
    }
    let theta = 2.0 * std::f64::consts::PI * p as f64 / g;
    let (ke, me) = element_matrices_1d(p, scheme);
    let phase = C64::from_polar(1.0, theta);
    // local node i < p maps to Bloch DOF i; node p to DOF 0 of the next cell
    let map = |i: usize| if i < p { (i, C64::new(1.0, 0.0)) } else { (0, phase) };
    let mut kt = Mat::<C64>::zeros(p, p);
    let mut mt = Mat::<C64>::zeros(p, p);
    for i in 0..=p {
        let (a, sa) = map(i);
        for j in 0..=p {
            let (b, sb) = map(j);
            let f = sa.conj() * sb;
            kt[(a, b)] += f * ke[i][j];
            mt[(a, b)] += f * me[i][j];
        }
    }
    let pairs = dense_generalized_eig(&kt, &mt, EigSelection::All, &EigOptions::default())?;
    let branch = ((theta / std::f64::consts::PI).ceil() as usize).clamp(1, p);
    let mu = pairs
        .get(branch - 1)
        .ok_or_else(|| Error::Eigen { reason: "missing dispersion branch".into(), found: pairs.len() })?
        .value
        .re;
    Ok(mu.max(0.0).sqrt() / theta)
}

/// `samples` points `(1/G, c_h/c)` with `1/G` evenly spaced in `(0, 1/g_min]`.
pub fn dispersion_curve(spec: &DispersionSpec, samples: usize) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    let top = 1.0 / spec.g_min;
    (1..=samples)
        .map(|j| {
            let inv_g = top * j as f64 / samples as f64;
            phase_velocity(spec.p, spec.scheme, 1.0 / inv_g).map(|v| (inv_g, v))
        })
        .collect()
}
