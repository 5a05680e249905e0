//! Experiment configuration: one JSON document with a block per subcommand.
//! Every field has a default, so `{}` is a valid config.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use xphase_core::analysis::StateConvention;
use xphase_core::dynamics::IntegratorConfig;
use xphase_core::oracle::Grid1D;
use xphase_core::potentials::PotentialSpec;
use xphase_core::{Error, Flavor, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: PotentialSpec,
    pub flavor: Flavor,
    pub mass: f64,
    pub hbar: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub integrator: IntegratorConfig,
    pub simulate: SimulateConfig,
    pub dwell: DwellConfig,
    pub uncertainty: UncertaintyConfig,
    pub classical_limit: ClassicalLimitConfig,
    pub ellipse: EllipseConfig,
    pub spectrum: SpectrumConfig,
    pub compare: CompareConfig,
    pub ensemble: EnsembleConfig,
    pub identity: IdentityConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            potential: PotentialSpec::default(),
            flavor: Flavor::Mfqm,
            mass: 1.0,
            hbar: 0.1,
            seed: 0,
            out_dir: PathBuf::from("xphase-out"),
            integrator: IntegratorConfig::default(),
            simulate: SimulateConfig::default(),
            dwell: DwellConfig::default(),
            uncertainty: UncertaintyConfig::default(),
            classical_limit: ClassicalLimitConfig::default(),
            ellipse: EllipseConfig::default(),
            spectrum: SpectrumConfig::default(),
            compare: CompareConfig::default(),
            ensemble: EnsembleConfig::default(),
            identity: IdentityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// `(x, y, p, q)`.
    pub initial: [f64; 4],
    pub t_max: f64,
    /// Read `initial` as `(x, ȳ, p, q̄)` and multiply the chord by `hbar`.
    pub scaled: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            initial: [1.0, 0.0, 0.0, 0.5],
            t_max: 20.0,
            scaled: false,
        }
    }
}

/// CCM: start at `x0` with `H_R = energy`, `H_I = delta_e`.
/// MFQM: chord ends at the bottom of the `x0` well with `H⁺ = energy`,
/// `H⁻ = delta_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DwellConfig {
    pub energy: f64,
    pub delta_e: f64,
    pub x0: f64,
    pub t_max: f64,
    pub x_well_max: f64,
}

impl Default for DwellConfig {
    fn default() -> Self {
        Self {
            energy: 0.3,
            delta_e: 0.1,
            x0: 1.0,
            t_max: 100.0,
            x_well_max: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintyConfig {
    pub e_r: f64,
    pub x0: f64,
    pub delta_e: Vec<f64>,
    /// Each run lasts `span_factor / delta_e`.
    pub span_factor: f64,
    /// Tolerances for the sweep runs; near-pole passages between crossings
    /// need tighter control than the global default.
    pub integrator: IntegratorConfig,
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        Self {
            e_r: 0.3,
            x0: 1.0,
            delta_e: vec![0.5, 0.3, 0.2, 0.1, 0.05],
            span_factor: 40.0,
            integrator: IntegratorConfig {
                rel_tol: 1e-12,
                abs_tol: 1e-14,
                ..IntegratorConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalLimitConfig {
    pub hbar: Vec<f64>,
    /// `(x, ȳ, p, q̄)`.
    pub start: [f64; 4],
    pub t_max: f64,
}

impl Default for ClassicalLimitConfig {
    fn default() -> Self {
        Self {
            hbar: vec![0.4, 0.2, 0.1, 0.05],
            start: [1.0, 1.0, 0.3, 0.0],
            t_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EllipseConfig {
    /// MFQM start; the CCM run starts from `(x, y, p, -q)`.
    pub initial: [f64; 4],
    pub periods: f64,
}

impl Default for EllipseConfig {
    fn default() -> Self {
        Self {
            initial: [1.0, 0.5, 0.0, 0.0],
            periods: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub grid: Grid1D,
    pub levels: usize,
    pub wavefunctions: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            grid: Grid1D {
                x_min: -2.5,
                x_max: 2.5,
                n: 2001,
            },
            levels: 4,
            wavefunctions: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub e_r: f64,
    pub x0: f64,
    pub delta_e: Vec<f64>,
    pub span_factor: f64,
    pub x_well_max: f64,
    pub state: StateConvention,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            e_r: 0.3,
            x0: 1.0,
            delta_e: vec![0.2, 0.1, 0.05],
            span_factor: 10.0,
            x_well_max: 2.0,
            state: StateConvention::Symmetric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    /// `(x, p)` of the Gaussian centre.
    pub center: [f64; 2],
    pub sigma_x: f64,
    pub sigma_p: f64,
    pub samples: usize,
    /// Transport time along the classical flow.
    pub t: f64,
    /// MFQM start for the rebound run on the inverted oscillator.
    pub rebound_initial: [f64; 4],
    pub rebound_t_max: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            center: [-3.0, 0.0],
            sigma_x: FRAC_1_SQRT_2,
            sigma_p: FRAC_1_SQRT_2,
            samples: 10_000,
            t: 2.0,
            rebound_initial: [-3.0, 0.0, 0.0, 0.0],
            rebound_t_max: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityConfig {
    pub points: usize,
    pub half_width: f64,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self {
            points: 1000,
            half_width: 2.0,
        }
    }
}

fn bad(field: &str, why: &str) -> Error {
    Error::Usage(format!("config field `{field}` {why}"))
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(field, &format!("must be positive and finite, got {v}")))
    }
}

fn positive_list(field: &str, list: &[f64]) -> Result<()> {
    if list.is_empty() {
        return Err(bad(field, "must not be empty"));
    }
    for (i, v) in list.iter().enumerate() {
        positive(&format!("{field}[{i}]"), *v)?;
    }
    Ok(())
}

fn prefixed(prefix: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::Usage(m) => Error::Usage(format!("{prefix}{m}")),
        other => other,
    })
}

impl ExperimentConfig {
    /// Reads `path` (or starts from `{}`), applies `--set` overrides and
    /// deserializes, reporting the path of any offending field.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    Error::Usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str::<Value>(&text).map_err(|e| {
                    Error::Usage(format!("config {} is not valid JSON: {e}", p.display()))
                })?
            }
            None => Value::Object(Default::default()),
        };
        for item in overrides {
            apply_override(&mut doc, item)?;
        }
        let cfg: Self = serde_path_to_error::deserialize(doc).map_err(|e| {
            let path = e.path().to_string();
            Error::Usage(format!("config field `{path}`: {}", e.inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        positive("mass", self.mass)?;
        positive("hbar", self.hbar)?;
        self.integrator.validate()?;
        positive("simulate.t_max", self.simulate.t_max)?;
        positive("dwell.t_max", self.dwell.t_max)?;
        if self.dwell.delta_e == 0.0 {
            return Err(bad("dwell.delta_e", "must be nonzero"));
        }
        positive("dwell.x_well_max", self.dwell.x_well_max)?;
        positive_list("uncertainty.delta_e", &self.uncertainty.delta_e)?;
        positive("uncertainty.span_factor", self.uncertainty.span_factor)?;
        prefixed("uncertainty.", self.uncertainty.integrator.validate())?;
        positive_list("classical_limit.hbar", &self.classical_limit.hbar)?;
        positive("classical_limit.t_max", self.classical_limit.t_max)?;
        positive("ellipse.periods", self.ellipse.periods)?;
        prefixed("spectrum.", self.spectrum.grid.validate())?;
        if self.spectrum.levels == 0 {
            return Err(bad("spectrum.levels", "must be at least 1"));
        }
        positive_list("compare.delta_e", &self.compare.delta_e)?;
        positive("compare.span_factor", self.compare.span_factor)?;
        positive("compare.x_well_max", self.compare.x_well_max)?;
        positive("ensemble.sigma_x", self.ensemble.sigma_x)?;
        positive("ensemble.sigma_p", self.ensemble.sigma_p)?;
        if self.ensemble.samples == 0 {
            return Err(bad("ensemble.samples", "must be at least 1"));
        }
        if self.ensemble.t.is_nan() || self.ensemble.t < 0.0 {
            return Err(bad("ensemble.t", "must be nonnegative"));
        }
        positive("ensemble.rebound_t_max", self.ensemble.rebound_t_max)?;
        if self.identity.points == 0 {
            return Err(bad("identity.points", "must be at least 1"));
        }
        positive("identity.half_width", self.identity.half_width)?;
        Ok(())
    }
}

/// `a.b.c=VALUE`; the value is parsed as JSON and kept as a string otherwise.
fn apply_override(doc: &mut Value, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got `{item}`")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Usage(format!("--set has an empty key segment in `{key}`")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = match node {
            Value::Object(map) => map,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().expect("just created")
            }
            _ => {
                return Err(Error::Usage(format!(
                    "--set {key}: `{}` is not an object",
                    parts[..i].join(".")
                )))
            }
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("key has at least one segment")
}
