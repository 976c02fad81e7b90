//! Points-per-wavelength bookkeeping and frequency-dependent mesh sizes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Points per wavelength `G = 2πc/(ωh)`.
pub fn ppwl(omega: f64, c: f64, h: f64) -> f64 {
    2.0 * PI * c / (omega * h)
}

/// Element size giving `g` points per wavelength.
pub fn h_for_ppwl(omega: f64, c: f64, g: f64) -> f64 {
    2.0 * PI * c / (omega * g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MeshRule {
    /// `h ∝ ω^(−1−1/p)`, quasi-optimal error uniformly in ω.
    PollutionFree,
    /// `h ∝ ω^(−1−1/(2p))`, bounded relative error.
    BoundedError,
    /// `h = 2πc/(ωG)`.
    FixedPpwl(f64),
}

/// Anchors the asymptotic rules: they give `G = 10` at `omega_ref`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c: f64,
    pub omega_ref: f64,
}

impl Calibration {
    pub const REFERENCE_PPWL: f64 = 10.0;
}

pub fn mesh_size_rule(omega: f64, p: usize, rule: MeshRule, cal: Calibration) -> f64 {
    let pf = p as f64;
    let h_ref = h_for_ppwl(cal.omega_ref, cal.c, Calibration::REFERENCE_PPWL);
    let power = |e: f64| h_ref * (omega / cal.omega_ref).powf(e);
    match rule {
        MeshRule::PollutionFree => power(-1.0 - 1.0 / pf),
        MeshRule::BoundedError => power(-1.0 - 1.0 / (2.0 * pf)),
        MeshRule::FixedPpwl(g) => h_for_ppwl(omega, cal.c, g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppwl_substitution() {
        // ωh/c = 2π/10
        let (omega, c) = (3.0, 1.7);
        let h = 2.0 * PI / 10.0 * c / omega;
        assert!((ppwl(omega, c, h) - 10.0).abs() < 1e-12);
        assert!((ppwl(2.0 * PI, 1.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invert_for_h() {
        let h = h_for_ppwl(2.0 * PI * 5.0, 1.5, 5.0);
        assert!((h - 0.06).abs() < 1e-15);
        assert!((ppwl(2.0 * PI * 5.0, 1.5, h) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rules() {
        let cal = Calibration { c: 1.0, omega_ref: 2.0 * PI };
        assert!((mesh_size_rule(2.0 * PI, 1, MeshRule::FixedPpwl(10.0), cal) - 0.1).abs() < 1e-15);
        let r = mesh_size_rule(2.0, 1, MeshRule::PollutionFree, cal) / mesh_size_rule(4.0, 1, MeshRule::PollutionFree, cal);
        assert!((r - 4.0).abs() < 1e-12);
        let q = mesh_size_rule(4.0, 2, MeshRule::BoundedError, cal) / mesh_size_rule(2.0, 2, MeshRule::BoundedError, cal);
        assert!((q - 2f64.powf(-1.25)).abs() < 1e-14);
        // calibration point
        for rule in [MeshRule::PollutionFree, MeshRule::BoundedError] {
            assert!((ppwl(cal.omega_ref, 1.0, mesh_size_rule(cal.omega_ref, 2, rule, cal)) - 10.0).abs() < 1e-12);
        }
    }
}
