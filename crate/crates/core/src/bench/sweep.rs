use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Method, ProblemKind, RunConfig};
use super::run::{meshes, run_case, velocity_model};
use crate::error::Result;
use crate::helmholtz::{dispersion_curve, DispersionSpec, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Converged,
    NotConverged,
    /// Below the DOFs-per-subdomain floor.
    Skipped,
    Failed,
}

/// One sweep cell; `iterations` and `coarse_dim` are `None` unless converged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub frequency: f64,
    pub dofs: usize,
    pub subdomains: usize,
    pub method: Method,
    pub iterations: Option<usize>,
    pub coarse_dim: Option<usize>,
    pub status: CellStatus,
    pub seconds: f64,
}

fn dof_count(cfg: &RunConfig) -> Result<usize> {
    Ok(match cfg.problem {
        ProblemKind::Helmholtz => meshes(cfg, velocity_model(cfg)?.min_speed())?.1.n_dofs(),
        ProblemKind::Maxwell => super::maxwell_case(cfg)?.system.space.n_edges(),
    })
}

/// Runs every `(f, N, method)` combination of `base`. Errors stay inside
/// their cell.
pub fn run_sweep(base: &RunConfig, frequencies: &[f64], subdomains: &[usize], methods: &[Method]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for &f in frequencies {
        for &n in subdomains {
            let mut cfg = base.clone();
            cfg.frequency = f;
            cfg.subdomains = n;
            let dofs = dof_count(&cfg).unwrap_or(0);
            for &method in methods {
                cfg.method = method;
                let t = Instant::now();
                let mut row = SweepRow {
                    frequency: f,
                    dofs,
                    subdomains: n,
                    method,
                    iterations: None,
                    coarse_dim: None,
                    status: CellStatus::Failed,
                    seconds: 0.0,
                };
                if dofs > 0 && dofs < n * cfg.min_dofs_per_subdomain {
                    row.status = CellStatus::Skipped;
                } else if let Ok(rep) = run_case(&cfg) {
                    row.status = if rep.converged { CellStatus::Converged } else { CellStatus::NotConverged };
                    if rep.converged {
                        row.iterations = Some(rep.iterations);
                        row.coarse_dim = Some(rep.coarse_dim);
                    }
                    row.dofs = rep.dofs;
                }
                row.seconds = t.elapsed().as_secs_f64();
                rows.push(row);
            }
        }
    }
    rows
}

fn cell(v: Option<usize>) -> String {
    v.map_or("-".to_string(), |x| x.to_string())
}

/// CSV with header `f,dofs,N,method,iterations,n0,status,time_s`;
/// non-converged and skipped cells show `-`. Timing is the last column.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["f", "dofs", "N", "method", "iterations", "n0", "status", "time_s"])?;
    for r in rows {
        let status = match r.status {
            CellStatus::Converged => "converged",
            CellStatus::NotConverged => "not-converged",
            CellStatus::Skipped => "skipped",
            CellStatus::Failed => "failed",
        };
        w.write_record([
            r.frequency.to_string(),
            r.dofs.to_string(),
            r.subdomains.to_string(),
            r.method.to_string(),
            cell(r.iterations),
            cell(r.coarse_dim),
            status.to_string(),
            format!("{:.3}", r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub scheme: String,
    pub p: usize,
    pub inv_g: f64,
    pub velocity: f64,
}

/// Writes `(scheme, p, 1/G, v)` for every spec.
pub fn emit_dispersion<W: Write>(specs: &[DispersionSpec], samples: usize, out: W) -> Result<Vec<DispersionRow>> {
    let mut rows = Vec::new();
    for spec in specs {
        for (inv_g, velocity) in dispersion_curve(spec, samples)? {
            rows.push(DispersionRow { scheme: spec.scheme.as_str().to_string(), p: spec.p, inv_g, velocity });
        }
    }
    let mut w = csv::Writer::from_writer(out);
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

pub fn read_dispersion<R: Read>(input: R) -> Result<Vec<DispersionRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<DispersionRow>, _>>()?)
}

/// Specs for every `(order, scheme)` pair.
pub fn dispersion_specs(orders: &[usize], schemes: &[Scheme]) -> Result<Vec<DispersionSpec>> {
    let mut out = Vec::new();
    for &s in schemes {
        for &p in orders {
            let spec = DispersionSpec::new(p, s);
            spec.validate()?;
            out.push(spec);
        }
    }
    Ok(out)
}
