//! Batch front-end: TOML run configurations, the named experiments and their
//! CSV/JSON/SVG output.
//!
//! Units throughout the configuration: energies in eV, lengths in nm, angles
//! in radians, winding in nm^-1.

mod emit;
mod run;

pub use emit::{emit, format_number, render_csv, render_json, render_svg, write_output};
pub use run::{dump_mode, run_experiment};

use crate::absorption::{uniform_grid, AbsorptionConfig};
use crate::constants::{DEFAULT_GAMMA0_EV, DEFAULT_LATTICE_A_NM};
use crate::detector::{ForestSpec, PerTube};
use crate::error::Error;
use crate::fiber::FiberSpec;
use crate::graphene::{LatticeConstants, TBParams};
use crate::path::{GeometryConfig, PathKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use thiserror::Error as ThisError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, ThisError)]
pub enum RunnerError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Domain(#[from] Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunnerError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Domain(_) => 3,
            Self::Io { .. } => 4,
        }
    }
}

/// Parameter errors found while validating a config are config errors; the
/// rest (metallic tube, energy out of range, no guided mode) are domain errors.
fn validation(e: Error) -> RunnerError {
    match e {
        Error::InvalidParameter { .. } => RunnerError::Config(e.to_string()),
        other => RunnerError::Domain(other),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Spectrum,
    SweepLength,
    SweepAngle,
    SweepWinding,
    Forest,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TightBindingConfig {
    /// eV
    pub gamma0: f64,
    pub u: f64,
    /// Lattice constant, nm.
    pub a: f64,
}

impl Default for TightBindingConfig {
    fn default() -> Self {
        Self { gamma0: DEFAULT_GAMMA0_EV, u: 0.0, a: DEFAULT_LATTICE_A_NM }
    }
}

impl TightBindingConfig {
    pub fn params(&self) -> crate::Result<TBParams> {
        TBParams::new(self.gamma0, self.u, LatticeConstants::new(self.a)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    /// Fiber surface to tube centre-line, nm.
    pub gap: f64,
    /// Tube length, nm.
    pub length: f64,
    pub path: PathKind,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { gap: 1.25, length: 2000.0, path: PathKind::Straight { angle: PI / 2.0 } }
    }
}

impl GeometrySection {
    pub fn geometry(&self) -> GeometryConfig {
        GeometryConfig { gap: self.gap }
    }
}

/// Which light the tube sees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum FieldConfig {
    /// Guided HE11 mode, with rotation label `f` and direction `p` (each +-1).
    Fiber {
        #[serde(default = "one")]
        f: i32,
        #[serde(default = "one")]
        p: i32,
    },
    /// Free-space beam of cross-section `area` (nm^2), propagating along z.
    PlaneWave { area: f64, polarization: [f64; 3] },
}

fn one() -> i32 {
    1
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self::Fiber { f: 1, p: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// eV
    pub energy_range: [f64; 2],
    pub points: usize,
    /// Wavelength of the `--dump-mode` field map, nm.
    pub mode_wavelength: f64,
    /// Grid points per side of the field map.
    pub mode_grid: usize,
    /// Half-width of the field map in fiber radii.
    pub mode_extent: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { energy_range: [1.0, 3.5], points: 501, mode_wavelength: 868.0, mode_grid: 101, mode_extent: 3.0 }
    }
}

/// Swept values: either listed, or `points` evenly spaced in `[start, stop]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl SweepConfig {
    pub fn values(&self) -> Result<Vec<f64>, RunnerError> {
        let v = match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) if n >= 1 => uniform_grid(a, b, n),
            _ => {
                return Err(RunnerError::Config(
                    "[sweep] needs either `values` or all of `start`, `stop`, `points`".into(),
                ))
            }
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(RunnerError::Config("[sweep] values must be finite and non-empty".into()));
        }
        Ok(v)
    }
}

/// Parallel array of identical tubes. Without `per_tube` the single-tube
/// probability is computed from `n`, `[geometry]` and `[absorption]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub counts: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_tube: Option<PerTube>,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self { counts: vec![20_000], per_tube: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

/// A complete run. Plain keys come before tables so the echo stays valid TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Zigzag index of the tube; required by every experiment except `forest`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub tight_binding: TightBindingConfig,
    #[serde(default)]
    pub fiber: FiberSpec,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub absorption: AbsorptionConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub forest: ForestSpec,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    1
}

impl RunConfig {
    /// Every sub-config valid and the experiment's own keys present.
    pub fn validate(&self) -> Result<(), RunnerError> {
        self.tight_binding.params().map_err(validation)?;
        self.fiber.validate().map_err(validation)?;
        self.geometry.geometry().validate().map_err(validation)?;
        self.absorption.validate().map_err(validation)?;
        if !(self.geometry.length > 0.0 && self.geometry.length.is_finite()) {
            return Err(RunnerError::Config(format!("geometry.length must be positive, got {}", self.geometry.length)));
        }
        if let FieldConfig::Fiber { f, p } = self.field {
            if f.abs() != 1 || p.abs() != 1 {
                return Err(RunnerError::Config(format!("field.f and field.p must be +-1, got {f}, {p}")));
            }
        }
        if self.experiment != Experiment::Forest && self.experiment != Experiment::Array && self.n.is_none() {
            return Err(RunnerError::Config(format!("experiment `{}` needs the key `n`", self.experiment_name())));
        }
        match self.experiment {
            Experiment::Spectrum => {
                let [lo, hi] = self.spectrum.energy_range;
                if !(lo > 0.0 && lo < hi) || self.spectrum.points < 2 {
                    return Err(RunnerError::Config("spectrum needs 0 < lo < hi and at least 2 points".into()));
                }
                if hi > crate::constants::MAX_PHOTON_ENERGY_EV {
                    return Err(Error::EnergyOutOfRange { energy_ev: hi, max_ev: crate::constants::MAX_PHOTON_ENERGY_EV }.into());
                }
            }
            Experiment::SweepLength | Experiment::SweepAngle | Experiment::SweepWinding => {
                self.sweep.values()?;
            }
            Experiment::Forest => {
                let mut f = self.forest.clone();
                f.seed = self.seed;
                f.validate().map_err(validation)?;
            }
            Experiment::Array => {
                if self.array.counts.is_empty() || self.array.counts.contains(&0) {
                    return Err(RunnerError::Config("array.counts must be non-empty and positive".into()));
                }
                if self.array.per_tube.is_none() && self.n.is_none() {
                    return Err(RunnerError::Config("array needs `n` or `array.per_tube`".into()));
                }
            }
        }
        Ok(())
    }

    pub fn experiment_name(&self) -> &'static str {
        match self.experiment {
            Experiment::Spectrum => "spectrum",
            Experiment::SweepLength => "sweep_length",
            Experiment::SweepAngle => "sweep_angle",
            Experiment::SweepWinding => "sweep_winding",
            Experiment::Forest => "forest",
            Experiment::Array => "array",
        }
    }

    /// Effective config as TOML, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serialises")
    }
}

/// Parse and validate a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, RunnerError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| RunnerError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config: RunConfig,
    pub version: String,
    pub seed: u64,
    /// Derived scalars worth keeping next to the curve.
    pub extras: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis_label: String,
    pub axis: Vec<f64>,
    pub eta_label: String,
    pub eta: Vec<f64>,
    /// Monte Carlo standard error, forest only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<Vec<f64>>,
    pub metadata: Metadata,
}
