//! Run configuration and its `key = value` text format.
//!
//! Grammar: one `key = value` pair per line; blank lines and lines starting
//! with `#` are ignored; every key is optional and unknown keys are errors.
//! [`RunConfig::render`] writes every key, and `parse(render(c)) == c`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dd::{OverlapMode, PartitionShape};
use crate::error::{Error, Result};
use crate::helmholtz::{ElementOrder, OuterBc};
use crate::numkit::KrylovVariant;
use crate::precond::TwoLevelMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Helmholtz,
    Maxwell,
}

/// Coefficient field. Helmholtz models give the wave speed in km/s; the
/// Maxwell `channels` model gives `ε_r` with the stated contrast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSpec {
    Constant(f64),
    /// Three-layer wedge, speeds bottom to top.
    Wedge([f64; 3]),
    /// Raster velocity file.
    Raster(PathBuf),
    /// Built-in Marmousi-like layered section.
    Synthetic { c_min: f64, c_max: f64 },
    /// Horizontal `ε_r` channels of value `contrast` in a unit background.
    Channels(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    OneLevel,
    Grid,
    Dtn,
    HGeneo,
    DeltaGeneo,
    Asp,
    FreeCs,
    GeneoComplement,
}

impl Method {
    pub const ALL: [Method; 8] =
        [Self::OneLevel, Self::Grid, Self::Dtn, Self::HGeneo, Self::DeltaGeneo, Self::Asp, Self::FreeCs, Self::GeneoComplement];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::OneLevel => "one-level",
            Self::Grid => "grid",
            Self::Dtn => "dtn",
            Self::HGeneo => "hgeneo",
            Self::DeltaGeneo => "deltageneo",
            Self::Asp => "asp",
            Self::FreeCs => "free-cs",
            Self::GeneoComplement => "geneo-complement",
        }
    }

    pub fn supports(self, kind: ProblemKind) -> bool {
        match kind {
            ProblemKind::Helmholtz => matches!(self, Self::OneLevel | Self::Grid | Self::Dtn | Self::HGeneo | Self::DeltaGeneo),
            ProblemKind::Maxwell => matches!(self, Self::OneLevel | Self::Asp | Self::FreeCs | Self::GeneoComplement),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub model: ModelSpec,
    /// Domain size in km.
    pub width: f64,
    pub height: f64,
    /// Frequency in Hz; `ω = 2πf`.
    pub frequency: f64,
    /// Points per wavelength at the slowest speed, counted per DOF spacing.
    pub ppwl: f64,
    pub order: ElementOrder,
    /// Cells along x of the coarse mesh; `0` derives it from `ppwl`.
    pub cells: usize,
    /// Uniform refinements from the coarse to the fine mesh.
    pub refine_levels: usize,
    pub outer_bc: OuterBc,
    /// Source position in km; `None` places it at `(width/2, 0.9·height)`.
    pub source: Option<[f64; 2]>,
    pub subdomains: usize,
    pub partition: PartitionShape,
    pub overlap: OverlapMode,
    pub overlap_layers: usize,
    pub method: Method,
    pub mode: TwoLevelMode,
    /// GenEO threshold `λ_min`.
    pub lambda_min: f64,
    /// Eigenmodes kept per subdomain.
    pub modes: usize,
    /// Maxwell GenEO threshold `τ`.
    pub tau: f64,
    /// Maxwell mass shift `α`.
    pub alpha: f64,
    pub krylov: KrylovVariant,
    pub tol: f64,
    pub max_iter: usize,
    pub restart: Option<usize>,
    pub seed: u64,
    /// Sweep cells with fewer DOFs per subdomain are skipped.
    pub min_dofs_per_subdomain: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Helmholtz,
            model: ModelSpec::Constant(1.0),
            width: 1.0,
            height: 1.0,
            frequency: 1.0,
            ppwl: 10.0,
            order: ElementOrder::P2,
            cells: 0,
            refine_levels: 1,
            outer_bc: OuterBc::Impedance,
            source: None,
            subdomains: 4,
            partition: PartitionShape::Auto,
            overlap: OverlapMode::Minimum,
            overlap_layers: 1,
            method: Method::OneLevel,
            mode: TwoLevelMode::Hybrid,
            lambda_min: 0.5,
            modes: 20,
            tau: 10.0,
            alpha: 1.0,
            krylov: KrylovVariant::Gmres,
            tol: 1e-6,
            max_iter: 500,
            restart: None,
            seed: 0,
            min_dofs_per_subdomain: 0,
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("invalid value '{value}' for '{key}'"))
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| bad(key, v))
}

fn floats<const N: usize>(key: &str, v: &str) -> Result<[f64; N]> {
    let parts: Vec<f64> = v.split(',').map(|p| num(key, p.trim())).collect::<Result<_>>()?;
    parts.try_into().map_err(|_| bad(key, v))
}

fn render_model(m: &ModelSpec) -> String {
    match m {
        ModelSpec::Constant(c) => format!("constant:{c}"),
        ModelSpec::Wedge([a, b, c]) => format!("wedge:{a},{b},{c}"),
        ModelSpec::Raster(p) => format!("raster:{}", p.display()),
        ModelSpec::Synthetic { c_min, c_max } => format!("synthetic:{c_min},{c_max}"),
        ModelSpec::Channels(c) => format!("channels:{c}"),
    }
}

fn parse_model(v: &str) -> Result<ModelSpec> {
    let (kind, rest) = v.split_once(':').ok_or_else(|| bad("model", v))?;
    Ok(match kind {
        "constant" => ModelSpec::Constant(num("model", rest)?),
        "wedge" => ModelSpec::Wedge(floats("model", rest)?),
        "raster" => ModelSpec::Raster(PathBuf::from(rest)),
        "synthetic" => {
            let [c_min, c_max] = floats("model", rest)?;
            ModelSpec::Synthetic { c_min, c_max }
        }
        "channels" => ModelSpec::Channels(num("model", rest)?),
        _ => return Err(bad("model", v)),
    })
}

fn render_partition(p: PartitionShape) -> String {
    match p {
        PartitionShape::Strips => "strips".into(),
        PartitionShape::Auto => "auto".into(),
        PartitionShape::Grid(x, y) => format!("grid:{x}x{y}"),
    }
}

fn parse_partition(v: &str) -> Result<PartitionShape> {
    match v {
        "strips" => Ok(PartitionShape::Strips),
        "auto" => Ok(PartitionShape::Auto),
        _ => {
            let dims = v.strip_prefix("grid:").ok_or_else(|| bad("partition", v))?;
            let (x, y) = dims.split_once('x').ok_or_else(|| bad("partition", v))?;
            Ok(PartitionShape::Grid(num("partition", x)?, num("partition", y)?))
        }
    }
}

impl RunConfig {
    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency
    }

    pub fn source_point(&self) -> [f64; 2] {
        self.source.unwrap_or([0.5 * self.width, 0.9 * self.height])
    }

    pub fn render(&self) -> String {
        let kind = match self.problem {
            ProblemKind::Helmholtz => "helmholtz",
            ProblemKind::Maxwell => "maxwell",
        };
        let bc = match self.outer_bc {
            OuterBc::Impedance => "impedance",
            OuterBc::Dirichlet => "dirichlet",
        };
        let overlap = match self.overlap {
            OverlapMode::Minimum => "minimum",
            OverlapMode::Coarse => "coarse",
        };
        let mode = match self.mode {
            TwoLevelMode::Additive => "additive",
            TwoLevelMode::Hybrid => "hybrid",
        };
        let krylov = match self.krylov {
            KrylovVariant::Gmres => "gmres",
            KrylovVariant::Cg => "cg",
        };
        let source = match self.source {
            Some([x, y]) => format!("{x},{y}"),
            None => "default".into(),
        };
        let restart = self.restart.map_or("none".to_string(), |r| r.to_string());
        let rows: Vec<(&str, String)> = vec![
            ("problem", kind.into()),
            ("model", render_model(&self.model)),
            ("width", self.width.to_string()),
            ("height", self.height.to_string()),
            ("frequency", self.frequency.to_string()),
            ("ppwl", self.ppwl.to_string()),
            ("order", self.order.degree().to_string()),
            ("cells", self.cells.to_string()),
            ("refine_levels", self.refine_levels.to_string()),
            ("outer_bc", bc.into()),
            ("source", source),
            ("subdomains", self.subdomains.to_string()),
            ("partition", render_partition(self.partition)),
            ("overlap", overlap.into()),
            ("overlap_layers", self.overlap_layers.to_string()),
            ("method", self.method.to_string()),
            ("mode", mode.into()),
            ("lambda_min", self.lambda_min.to_string()),
            ("modes", self.modes.to_string()),
            ("tau", self.tau.to_string()),
            ("alpha", self.alpha.to_string()),
            ("krylov", krylov.into()),
            ("tol", self.tol.to_string()),
            ("max_iter", self.max_iter.to_string()),
            ("restart", restart),
            ("seed", self.seed.to_string()),
            ("min_dofs_per_subdomain", self.min_dofs_per_subdomain.to_string()),
        ];
        rows.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            c.set(k.trim(), v.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Sets one key from its text value; used by the parser and CLI overrides.
    pub fn set(&mut self, k: &str, v: &str) -> Result<()> {
        match k {
            "problem" => {
                self.problem = match v {
                    "helmholtz" => ProblemKind::Helmholtz,
                    "maxwell" => ProblemKind::Maxwell,
                    _ => return Err(bad(k, v)),
                }
            }
            "model" => self.model = parse_model(v)?,
            "width" => self.width = num(k, v)?,
            "height" => self.height = num(k, v)?,
            "frequency" => self.frequency = num(k, v)?,
            "ppwl" => self.ppwl = num(k, v)?,
            "order" => self.order = ElementOrder::from_degree(num(k, v)?)?,
            "cells" => self.cells = num(k, v)?,
            "refine_levels" => self.refine_levels = num(k, v)?,
            "outer_bc" => {
                self.outer_bc = match v {
                    "impedance" => OuterBc::Impedance,
                    "dirichlet" => OuterBc::Dirichlet,
                    _ => return Err(bad(k, v)),
                }
            }
            "source" => self.source = if v == "default" { None } else { Some(floats(k, v)?) },
            "subdomains" => self.subdomains = num(k, v)?,
            "partition" => self.partition = parse_partition(v)?,
            "overlap" => {
                self.overlap = match v {
                    "minimum" => OverlapMode::Minimum,
                    "coarse" => OverlapMode::Coarse,
                    _ => return Err(bad(k, v)),
                }
            }
            "overlap_layers" => self.overlap_layers = num(k, v)?,
            "method" => self.method = v.parse()?,
            "mode" => {
                self.mode = match v {
                    "additive" => TwoLevelMode::Additive,
                    "hybrid" => TwoLevelMode::Hybrid,
                    _ => return Err(bad(k, v)),
                }
            }
            "lambda_min" => self.lambda_min = num(k, v)?,
            "modes" => self.modes = num(k, v)?,
            "tau" => self.tau = num(k, v)?,
            "alpha" => self.alpha = num(k, v)?,
            "krylov" => {
                self.krylov = match v {
                    "gmres" => KrylovVariant::Gmres,
                    "cg" => KrylovVariant::Cg,
                    _ => return Err(bad(k, v)),
                }
            }
            "tol" => self.tol = num(k, v)?,
            "max_iter" => self.max_iter = num(k, v)?,
            "restart" => self.restart = if v == "none" { None } else { Some(num(k, v)?) },
            "seed" => self.seed = num(k, v)?,
            "min_dofs_per_subdomain" => self.min_dofs_per_subdomain = num(k, v)?,
            _ => return Err(Error::Config(format!("unknown key '{k}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("width", self.width), ("height", self.height), ("ppwl", self.ppwl), ("alpha", self.alpha)];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{k} must be positive and finite")));
            }
        }
        if !(self.frequency >= 0.0) {
            return Err(Error::Config("frequency must be non-negative".into()));
        }
        if self.subdomains == 0 {
            return Err(Error::Config("subdomains must be >= 1".into()));
        }
        if !self.method.supports(self.problem) {
            return Err(Error::Config(format!("method {} does not apply to this problem", self.method)));
        }
        if self.overlap == OverlapMode::Coarse && self.refine_levels == 0 {
            return Err(Error::Config("coarse overlap needs refine_levels >= 1".into()));
        }
        if self.method == Method::Grid && self.refine_levels == 0 {
            return Err(Error::Config("the grid coarse space needs refine_levels >= 1".into()));
        }
        crate::numkit::KrylovConfig { tol: self.tol, max_iter: self.max_iter, restart: self.restart, variant: self.krylov }.validate()
    }
}
