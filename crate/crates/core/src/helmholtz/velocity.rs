//! Wave speed models in km/s.
//!
//! Raster file layout: one UTF-8 header line
//! `nx ny xmin xmax ymin ymax unit` (`unit` is `m/s` or `km/s`), followed by
//! `nx*ny` little-endian `f32` samples in row-major order starting at the
//! top-left corner `(xmin, ymax)`. Samples sit on the nodes of a uniform grid.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three layers separated by two straight, non-parallel interfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeModel {
    pub width: f64,
    pub height: f64,
    /// Speeds bottom, middle, top.
    pub speeds: [f64; 3],
    /// Lower interface: heights at `x = 0` and `x = width`.
    pub lower: [f64; 2],
    /// Upper interface: heights at `x = 0` and `x = width`.
    pub upper: [f64; 2],
}

impl WedgeModel {
    /// Standard geometry: a middle layer thinning from left to right.
    pub fn new(width: f64, height: f64, speeds: [f64; 3]) -> Self {
        Self { width, height, speeds, lower: [0.2 * height, 0.45 * height], upper: [0.8 * height, 0.55 * height] }
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let s = (x / self.width).clamp(0.0, 1.0);
        let lo = self.lower[0] + s * (self.lower[1] - self.lower[0]);
        let hi = self.upper[0] + s * (self.upper[1] - self.upper[0]);
        if y < lo {
            self.speeds[0]
        } else if y < hi {
            self.speeds[1]
        } else {
            self.speeds[2]
        }
    }
}

/// Gridded wave speed, sampled bilinearly and clamped outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterModel {
    pub nx: usize,
    pub ny: usize,
    /// Raster extent in its own coordinates.
    pub bounds: [f64; 4],
    /// Domain extent the raster is stretched over, `[width, height]` in km.
    pub domain: [f64; 2],
    /// km/s, row-major from the top-left.
    pub values: Vec<f64>,
}

impl RasterModel {
    pub fn new(nx: usize, ny: usize, bounds: [f64; 4], domain: [f64; 2], values: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(Error::Format(format!("raster {nx}x{ny} with {} samples", values.len())));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Format("raster contains non-positive or non-finite velocities".into()));
        }
        if !(bounds[1] > bounds[0] && bounds[3] > bounds[2]) {
            return Err(Error::Format("raster bounds must be increasing".into()));
        }
        Ok(Self { nx, ny, bounds, domain, values })
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    #[inline]
    fn at(&self, i: usize, j_from_top: usize) -> f64 {
        self.values[j_from_top * self.nx + i]
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let [xmin, xmax, ymin, ymax] = self.bounds;
        let rx = xmin + x / self.domain[0] * (xmax - xmin);
        let ry = ymin + y / self.domain[1] * (ymax - ymin);
        let fx = if self.nx > 1 { ((rx - xmin) / (xmax - xmin) * (self.nx - 1) as f64).clamp(0.0, (self.nx - 1) as f64) } else { 0.0 };
        // row 0 is the top edge
        let fy = if self.ny > 1 { ((ymax - ry) / (ymax - ymin) * (self.ny - 1) as f64).clamp(0.0, (self.ny - 1) as f64) } else { 0.0 };
        let (i0, j0) = (fx.floor() as usize, fy.floor() as usize);
        let (i1, j1) = ((i0 + 1).min(self.nx - 1), (j0 + 1).min(self.ny - 1));
        let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
        let top = self.at(i0, j0) * (1.0 - tx) + self.at(i1, j0) * tx;
        let bot = self.at(i0, j1) * (1.0 - tx) + self.at(i1, j1) * tx;
        top * (1.0 - ty) + bot * ty
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VelocityModel {
    Constant(f64),
    LayeredWedge(WedgeModel),
    Raster(RasterModel),
}

impl VelocityModel {
    /// Wave speed `c(x, y)` in km/s, with `(x, y)` measured from the domain's
    /// lower-left corner.
    pub fn speed(&self, x: f64, y: f64) -> f64 {
        match self {
            VelocityModel::Constant(c) => *c,
            VelocityModel::LayeredWedge(w) => w.eval(x, y),
            VelocityModel::Raster(r) => r.eval(x, y),
        }
    }

    pub fn min_speed(&self) -> f64 {
        match self {
            VelocityModel::Constant(c) => *c,
            VelocityModel::LayeredWedge(w) => w.speeds.iter().copied().fold(f64::INFINITY, f64::min),
            VelocityModel::Raster(r) => r.min(),
        }
    }

    pub fn max_speed(&self) -> f64 {
        match self {
            VelocityModel::Constant(c) => *c,
            VelocityModel::LayeredWedge(w) => w.speeds.iter().copied().fold(0.0, f64::max),
            VelocityModel::Raster(r) => r.max(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            VelocityModel::Constant(c) => c.is_finite() && *c > 0.0,
            VelocityModel::LayeredWedge(w) => w.speeds.iter().all(|c| c.is_finite() && *c > 0.0) && w.width > 0.0 && w.height > 0.0,
            VelocityModel::Raster(r) => r.min() > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config("wave speed must be positive everywhere".into()))
        }
    }
}

/// Acoustic wave speed from density and a P-wave speed pair, `c = sqrt(ρ c_P²)`.
pub fn wave_speed_from(rho: f64, c_p: f64) -> f64 {
    (rho * c_p * c_p).sqrt()
}

fn unit_scale(unit: &str) -> Result<f64> {
    match unit {
        "m/s" => Ok(1e-3),
        "km/s" => Ok(1.0),
        other => Err(Error::Format(format!("unknown velocity unit '{other}'"))),
    }
}

/// Parses a raster velocity file and stretches it over `[0,width]×[0,height]`.
pub fn load_raster_model(path: &Path, width: f64, height: f64) -> Result<VelocityModel> {
    let file = std::fs::File::open(path)?;
    read_raster(BufReader::new(file), width, height)
}

pub fn read_raster<R: Read>(reader: R, width: f64, height: f64) -> Result<VelocityModel> {
    let mut reader = BufReader::new(reader);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 7 {
        return Err(Error::Format(format!("raster header needs 7 fields, got {}", fields.len())));
    }
    let int = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad integer '{s}' in header")));
    let real = |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number '{s}' in header")));
    let (nx, ny) = (int(fields[0])?, int(fields[1])?);
    let bounds = [real(fields[2])?, real(fields[3])?, real(fields[4])?, real(fields[5])?];
    let scale = unit_scale(fields[6])?;
    let count = nx.checked_mul(ny).ok_or_else(|| Error::Format("raster too large".into()))?;
    let mut bytes = vec![0u8; count * 4];
    reader
        .read_exact(&mut bytes)
        .map_err(|_| Error::Format(format!("raster body shorter than {count} samples")))?;
    let values: Vec<f64> =
        bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64 * scale).collect();
    Ok(VelocityModel::Raster(RasterModel::new(nx, ny, bounds, [width, height], values)?))
}

/// Writes `values` (row-major from top-left, in `unit`) in the raster format.
pub fn write_raster<W: Write>(
    mut out: W,
    nx: usize,
    ny: usize,
    bounds: [f64; 4],
    unit: &str,
    values: &[f64],
) -> Result<()> {
    unit_scale(unit)?;
    if values.len() != nx * ny {
        return Err(Error::Format("sample count does not match nx*ny".into()));
    }
    writeln!(out, "{nx} {ny} {} {} {} {} {unit}", bounds[0], bounds[1], bounds[2], bounds[3])?;
    for v in values {
        out.write_all(&(*v as f32).to_le_bytes())?;
    }
    Ok(())
}

/// A synthetic layered, faulted sedimentary section on an `nx × ny` grid,
/// in m/s, between `c_min` and `c_max`. Used where no field data is shipped.
pub fn synthetic_section(nx: usize, ny: usize, c_min: f64, c_max: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        // depth fraction, 0 at the surface
        let d = j as f64 / (ny.max(2) - 1) as f64;
        for i in 0..nx {
            let x = i as f64 / (nx.max(2) - 1) as f64;
            let fold = 0.08 * (2.0 * std::f64::consts::PI * (1.5 * x + 0.3 * d)).sin();
            let throw = if x > 0.35 + 0.25 * d && x < 0.7 + 0.1 * d { 0.07 } else { 0.0 };
            let depth = (d + fold + throw).clamp(0.0, 1.0);
            // eight layers with a velocity ramp and alternating lithology
            let layer = (depth * 8.0).floor().min(7.0);
            let base = c_min + (c_max - c_min) * (depth * 0.8 + 0.2 * (layer / 7.0));
            let alt = if layer as usize % 2 == 1 { 0.9 } else { 1.0 };
            out.push((base * alt).clamp(c_min, c_max));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_raster() {
        let r = RasterModel::new(2, 2, [0.0, 1.0, 0.0, 1.0], [1.0, 1.0], vec![1.5; 4]).unwrap();
        let m = VelocityModel::Raster(r);
        for p in [[0.0, 0.0], [0.3, 0.9], [2.0, -1.0]] {
            assert!((m.speed(p[0], p[1]) - 1.5).abs() < 1e-15);
        }
    }

    #[test]
    fn bilinear_midpoint() {
        let r = RasterModel::new(2, 1, [0.0, 1.0, 0.0, 1.0], [1.0, 1.0], vec![1.0, 3.0]).unwrap();
        assert!((VelocityModel::Raster(r).speed(0.5, 0.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn top_row_is_first() {
        let r = RasterModel::new(1, 2, [0.0, 1.0, 0.0, 1.0], [1.0, 1.0], vec![1.0, 2.0]).unwrap();
        let m = VelocityModel::Raster(r);
        assert_eq!(m.speed(0.5, 1.0), 1.0);
        assert_eq!(m.speed(0.5, 0.0), 2.0);
    }

    #[test]
    fn round_trip_and_extrema() {
        let vals = synthetic_section(23, 11, 1500.0, 5500.0);
        let mut buf = Vec::new();
        write_raster(&mut buf, 23, 11, [0.0, 9.2, 0.0, 3.0], "m/s", &vals).unwrap();
        let m = read_raster(buf.as_slice(), 9.2, 3.0).unwrap();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min) / 1000.0;
        let hi = vals.iter().copied().fold(0.0, f64::max) / 1000.0;
        assert!((m.min_speed() - lo).abs() < 1e-6 && (m.max_speed() - hi).abs() < 1e-6);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(read_raster("2 2 0 1 0 1\n".as_bytes(), 1.0, 1.0), Err(Error::Format(_))));
        let mut buf = Vec::new();
        write_raster(&mut buf, 1, 1, [0.0, 1.0, 0.0, 1.0], "km/s", &[-1.0]).unwrap();
        assert!(matches!(read_raster(buf.as_slice(), 1.0, 1.0), Err(Error::Format(_))));
        assert!(matches!(read_raster("2 2 0 1 0 1 km/s\n\x00".as_bytes(), 1.0, 1.0), Err(Error::Format(_))));
    }

    #[test]
    fn wedge_layers() {
        let w = VelocityModel::LayeredWedge(WedgeModel::new(3.0, 1.0, [5.0, 2.5, 1.0]));
        assert_eq!(w.speed(1.0, 0.01), 5.0);
        assert_eq!(w.speed(1.0, 0.5), 2.5);
        assert_eq!(w.speed(1.0, 0.99), 1.0);
        assert_eq!(w.min_speed(), 1.0);
    }
}
