//! Mesh sizes from the three resolution rules, all calibrated to 10 points
//! per wavelength at 1 Hz. The asymptotic rules refine faster than ω.

use wavedd::helmholtz::{mesh_size_rule, ppwl, Calibration, MeshRule};

fn main() {
    let c = 1.5;
    let cal = Calibration { c, omega_ref: 2.0 * std::f64::consts::PI };
    let rules = [("fixed", MeshRule::FixedPpwl(10.0)), ("bounded", MeshRule::BoundedError), ("pollution-free", MeshRule::PollutionFree)];
    println!("{:>4} {:>2} {:>15} {:>10} {:>8}", "f", "p", "rule", "h", "ppwl");
    for f in [1.0, 4.0, 16.0] {
        let omega = 2.0 * std::f64::consts::PI * f;
        for p in [1, 2, 3] {
            for (name, rule) in rules {
                let h = mesh_size_rule(omega, p, rule, cal);
                println!("{f:>4} {p:>2} {name:>15} {h:>10.5} {:>8.2}", ppwl(omega, c, h));
            }
        }
    }
}
