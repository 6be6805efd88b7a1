//! JSON run configuration shared by the `recover`, `forward` and `verify`
//! pipelines.
//!
//! ```json
//! {
//!   "profiles": { "rho": [1.0], "beta": [0.0, -4.0] },
//!   "geometry": { "d": 1.0, "g": 9.8, "P_atm": 0.0 },
//!   "axis": { "c": 0.0, "eta0": 0.025, "csv_path": "axis.csv" },
//!   "numerics": { "N": 12, "M": 48, "grid": { "nq": 64, "np": 40, "nx": 41 }, "seed": 0 },
//!   "mode": "recover"
//! }
//! ```
//!
//! Polynomial coefficients are ascending. Relative paths are resolved
//! against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::axis::{AxisData, GRAVITY};
use crate::error::{Error, Result};
use crate::profiles::{BernoulliFunction, DensityProfile, Polynomial};
use crate::recovery::{BernoulliSign, DEFAULT_FILTER_TOL, DEFAULT_NODES, DEFAULT_NOISE_MARGIN, DEFAULT_ORDER};
use crate::reference::height::{DEFAULT_NP, DEFAULT_NQ, NEWTON_TOLERANCE};
use crate::reference::manufactured::BedVariant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub profiles: ProfilesConfig,
    pub geometry: GeometryConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<AxisConfig>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forward: Option<ForwardConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesConfig {
    pub rho: Vec<f64>,
    #[serde(default)]
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub d: f64,
    #[serde(default = "gravity")]
    pub g: f64,
    #[serde(rename = "P_atm", default)]
    pub p_atm: f64,
}

fn gravity() -> f64 {
    GRAVITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub c: f64,
    pub eta0: f64,
    /// Inline `[y, u]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<(f64, f64)>>,
    /// Two-column `y,u` CSV with a header row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(rename = "N", default = "default_order")]
    pub order: usize,
    #[serde(rename = "M", default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Sign of the Bernoulli term in the recursion; only for experiments.
    #[serde(default, skip_serializing_if = "is_minus")]
    pub sign: BernoulliSign,
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

fn is_minus(s: &BernoulliSign) -> bool {
    *s == BernoulliSign::Minus
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            nodes: DEFAULT_NODES,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            seed: 0,
            sign: BernoulliSign::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub nq: usize,
    pub np: usize,
    /// Columns of the output field.
    pub nx: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { nq: DEFAULT_NQ, np: DEFAULT_NP, nx: crate::field::DEFAULT_COLUMNS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Interior residual relative to `1 + sup |lap psi|`.
    pub pde: f64,
    /// Flux deviation relative to `|p0|`.
    pub flux: f64,
    pub symmetry: f64,
    pub bernoulli: f64,
    /// Surface dynamic residual relative to `Q`.
    pub surface: f64,
    pub newton: f64,
    /// Chebyshev tail threshold that fixes the recursion bandwidth.
    pub filter: f64,
    /// Fraction of the propagated noise floor used as mode cutoff.
    pub noise_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pde: 1e-6,
            flux: 1e-6,
            symmetry: 1e-8,
            bernoulli: 1e-8,
            surface: 1e-6,
            newton: NEWTON_TOLERANCE,
            filter: DEFAULT_FILTER_TOL,
            noise_margin: DEFAULT_NOISE_MARGIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Recover,
    Laminar,
    Newton,
    Manufacture,
}

/// Parameters of the forward solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardConfig {
    /// Bernoulli head; for `newton` it defaults to the bifurcation head.
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q_head: Option<f64>,
    /// Wave speed used when sampling axis data.
    #[serde(default = "unit")]
    pub c: f64,
    /// Surface `cos q` amplitude prescribed to the Newton solver.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub variant: BedVariant,
}

fn unit() -> f64 {
    1.0
}

fn default_amplitude() -> f64 {
    1e-3
}

fn default_max_iter() -> usize {
    15
}

fn default_lambda() -> f64 {
    -4.0
}

fn default_epsilon() -> f64 {
    0.01
}

impl Default for ForwardConfig {
    fn default() -> Self {
        Self {
            q_head: None,
            c: 1.0,
            amplitude: default_amplitude(),
            max_iter: default_max_iter(),
            lambda: default_lambda(),
            epsilon: default_epsilon(),
            variant: BedVariant::Cosh,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config and resolves `axis.csv_path` against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(p) = cfg.axis.as_mut().and_then(|a| a.csv_path.as_mut()) {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        if self.profiles.rho.is_empty() || !finite(&self.profiles.rho) || !finite(&self.profiles.beta) {
            return bad("profiles.rho must be a non-empty array of finite numbers".into());
        }
        let g = &self.geometry;
        if !(g.d > 0.0 && g.d.is_finite()) || !(g.g > 0.0 && g.g.is_finite()) || !g.p_atm.is_finite() {
            return bad(format!("geometry needs d > 0, g > 0, finite P_atm (d = {}, g = {})", g.d, g.g));
        }
        let n = &self.numerics;
        if n.order < 3 || n.nodes < 4 {
            return bad(format!("numerics needs N >= 3 and M >= 4 (N = {}, M = {})", n.order, n.nodes));
        }
        if n.grid.nx < 3 || n.grid.np < 4 || n.grid.nq < 4 || n.grid.nq % 2 != 0 {
            return bad("numerics.grid needs nx >= 3, np >= 4 and even nq >= 4".into());
        }
        if let Some(a) = &self.axis {
            if a.samples.is_some() == a.csv_path.is_some() {
                return bad("axis needs exactly one of samples and csv_path".into());
            }
            if !a.c.is_finite() || !a.eta0.is_finite() {
                return bad("axis.c and axis.eta0 must be finite".into());
            }
        }
        if self.mode == Mode::Recover && self.axis.is_none() {
            return bad("mode recover needs an axis section".into());
        }
        Ok(())
    }

    pub fn rho(&self) -> Result<DensityProfile> {
        Ok(DensityProfile::new(Polynomial::new(self.profiles.rho.clone())?))
    }

    pub fn beta(&self) -> Result<BernoulliFunction> {
        if self.profiles.beta.is_empty() {
            return Ok(BernoulliFunction::zero());
        }
        Ok(BernoulliFunction::new(Polynomial::new(self.profiles.beta.clone())?))
    }

    pub fn forward(&self) -> ForwardConfig {
        self.forward.unwrap_or_default()
    }

    /// Axis data on `M` Lobatto nodes.
    pub fn axis_data(&self) -> Result<AxisData> {
        let a = self.axis.as_ref().ok_or_else(|| Error::Config("missing axis section".into()))?;
        let samples = match (&a.samples, &a.csv_path) {
            (Some(s), _) => s.clone(),
            (None, Some(p)) => read_axis_csv(p)?,
            (None, None) => unreachable!("validated"),
        };
        let g = &self.geometry;
        AxisData::from_samples(&samples, self.numerics.nodes, a.eta0, a.c, g.d, g.g, g.p_atm).map_err(|e| match e {
            Error::InsufficientData(m) | Error::InvalidParameter(m) => Error::Config(format!("axis samples: {m}")),
            other => other,
        })
    }
}

/// `y,u` pairs from a CSV with a header row.
pub fn read_axis_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut rd = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!("axis row with {} fields", rec.len())));
        }
        let num = |k: usize| -> Result<f64> {
            let s = rec[k].trim();
            s.parse().map_err(|e| Error::Parse(format!("axis value {s:?}: {e}")))
        };
        out.push((num(0)?, num(1)?));
    }
    Ok(out)
}

pub fn write_axis_csv<W: std::io::Write>(axis: &AxisData, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["y", "u"])?;
    for (y, u) in axis.samples() {
        wr.write_record([crate::reference::height::fmt17(y), crate::reference::height::fmt17(u)])?;
    }
    wr.flush()?;
    Ok(())
}
