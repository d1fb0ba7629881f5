//! Run configuration: a JSON file plus `key=value` overrides on dot paths.
//!
//! Every key must exist in the default configuration; values are merged into
//! the defaults and then deserialized, so a partial file is enough.

use std::path::Path;

use pdirac_core::experiments::{CriticalScanSettings, DtnSettings, InequalitySettings, NonrelSettings, TestFunction};
use pdirac_core::grid::MIN_NODES;
use pdirac_core::operator::NYSTROM_COUPLING_LIMIT;
use pdirac_core::{PhysParams, Scheme};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("malformed override `{0}`, expected key=value")]
    MalformedOverride(String),
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

/// Grid scheme choice; `auto` uses Nyström below 0.85 of the critical charge
/// and Galerkin above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    Auto,
    Nystrom,
    Galerkin,
    GalerkinQuadratic,
}

impl SchemeChoice {
    pub fn resolve(self, params: &PhysParams) -> Scheme {
        match self {
            SchemeChoice::Auto if params.z > NYSTROM_COUPLING_LIMIT * params.critical_charge() => Scheme::Galerkin,
            SchemeChoice::Auto | SchemeChoice::Nystrom => Scheme::Nystrom,
            SchemeChoice::Galerkin => Scheme::Galerkin,
            SchemeChoice::GalerkinQuadratic => Scheme::GalerkinQuadratic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Dense,
    Variational,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub kappa: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    /// Grid scale; `null` means Z·m (or m when Z = 0).
    pub s: Option<f64>,
    pub scheme: SchemeChoice,
    pub stretch: f64,
}

impl GridConfig {
    pub fn scale_for(&self, params: &PhysParams) -> f64 {
        self.s
            .unwrap_or(if params.z > 0.0 { params.z * params.m } else { params.m })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub route: Route,
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorConfig {
    pub r_values: Vec<f64>,
    pub n: usize,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub eta_values: Vec<f64>,
    pub phi: TestFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalConfig {
    pub z_values: Vec<f64>,
    #[serde(flatten)]
    pub settings: CriticalScanSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentsConfig {
    /// Charges of the spectrum sweep; empty means `params.z` alone.
    pub z_values: Vec<f64>,
    pub commutator: CommutatorConfig,
    pub scaling: ScalingConfig,
    pub critical: CriticalConfig,
    pub inequalities: InequalitySettings,
    pub dtn: DtnSettings,
    pub nonrel: NonrelSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    /// Directory for report files; `null` prints the JSON report to stdout.
    pub directory: Option<String>,
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: PhysParams,
    pub channel: ChannelConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub experiments: ExperimentsConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: PhysParams::default(),
            channel: ChannelConfig { kappa: -1 },
            grid: GridConfig {
                n: 200,
                s: None,
                scheme: SchemeChoice::Auto,
                stretch: 1.0,
            },
            solver: SolverConfig {
                route: Route::Both,
                k: 4,
                tol: 1e-10,
                max_iter: 20_000,
                seed: 0x5eed,
            },
            experiments: ExperimentsConfig {
                z_values: Vec::new(),
                commutator: CommutatorConfig {
                    r_values: vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
                    n: 160,
                    s: 1.0,
                },
                scaling: ScalingConfig {
                    eta_values: vec![0.5, 0.25, 0.1, 0.05, 0.02, 0.01],
                    phi: TestFunction::Gaussian,
                },
                critical: CriticalConfig {
                    z_values: vec![60.0, 100.0, 120.0, 130.0],
                    settings: CriticalScanSettings::default(),
                },
                inequalities: InequalitySettings::default(),
                dtn: DtnSettings::default(),
                nonrel: NonrelSettings::default(),
            },
            output: OutputConfig {
                directory: None,
                formats: vec![Format::Json, Format::Csv],
            },
        }
    }
}

/// Short names accepted in overrides.
const ALIASES: &[(&str, &str)] = &[
    ("z", "params.z"),
    ("c", "params.c"),
    ("m", "params.m"),
    ("kappa", "channel.kappa"),
    ("n", "grid.n"),
    ("s", "grid.s"),
    ("scheme", "grid.scheme"),
    ("route", "solver.route"),
    ("k", "solver.k"),
];

fn canonical_key(key: &str) -> String {
    let lower = key.to_ascii_lowercase();
    ALIASES
        .iter()
        .find(|(a, _)| *a == lower)
        .map(|(_, full)| (*full).to_string())
        .unwrap_or_else(|| key.to_string())
}

/// Checks that every key of `user` exists in `reference` and merges it in.
fn merge(reference: &mut Value, user: &Value, prefix: &str) -> Result<(), ConfigError> {
    let Value::Object(user) = user else {
        return Err(invalid(
            if prefix.is_empty() { "<root>" } else { prefix },
            "expected an object",
        ));
    };
    for (key, value) in user {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        let Some(slot) = reference.as_object_mut().and_then(|m| m.get_mut(key)) else {
            return Err(ConfigError::UnknownKey(path));
        };
        if slot.is_object() && value.is_object() {
            merge(slot, value, &path)?;
        } else {
            *slot = value.clone();
        }
    }
    Ok(())
}

/// Nested object for a dot path, e.g. `grid.n` = 4 → {"grid": {"n": 4}}.
fn nest(path: &str, value: Value) -> Value {
    path.rsplit('.').fold(value, |inner, key| {
        let mut m = Map::new();
        m.insert(key.to_string(), inner);
        Value::Object(m)
    })
}

fn parse_override(text: &str) -> Result<(String, Value), ConfigError> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| ConfigError::MalformedOverride(text.into()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::MalformedOverride(text.into()));
    }
    // JSON literals where possible, bare strings otherwise
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    Ok((canonical_key(key), value))
}

impl RunConfig {
    /// Defaults, then the file at `path`, then `overrides` in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Read {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?;
                Some(serde_json::from_str::<Value>(&text).map_err(|e| ConfigError::Read {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?)
            }
            None => None,
        };
        Self::from_parts(file.as_ref(), overrides)
    }

    pub fn from_parts(file: Option<&Value>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut merged = serde_json::to_value(Self::default()).expect("default config serializes");
        if let Some(file) = file {
            merge(&mut merged, file, "")?;
        }
        for text in overrides {
            let (key, value) = parse_override(text)?;
            merge(&mut merged, &nest(&key, value), "")?;
        }
        let config: Self = serde_path_to_error::deserialize(&merged).map_err(|e| {
            let key = e.path().to_string();
            invalid(&key, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        if !(p.c.is_finite() && p.c > 0.0) {
            return Err(invalid("params.c", format!("c > 0 required, got {}", p.c)));
        }
        if !(p.m.is_finite() && p.m > 0.0) {
            return Err(invalid("params.m", format!("m > 0 required, got {}", p.m)));
        }
        if !(p.z.is_finite() && p.z >= 0.0) {
            return Err(invalid("params.z", format!("Z ≥ 0 required, got {}", p.z)));
        }
        if self.channel.kappa == 0 || self.channel.kappa.abs() > pdirac_core::channels::MAX_ABS_KAPPA {
            return Err(invalid(
                "channel.kappa",
                format!("0 < |κ| ≤ 3 required, got {}", self.channel.kappa),
            ));
        }
        check_n("grid.n", self.grid.n)?;
        if let Some(s) = self.grid.s {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid("grid.s", format!("s > 0 required, got {s}")));
            }
        }
        if !(self.grid.stretch >= 1.0 && self.grid.stretch.is_finite()) {
            return Err(invalid(
                "grid.stretch",
                format!("stretch ≥ 1 required, got {}", self.grid.stretch),
            ));
        }
        if self.solver.k < 1 {
            return Err(invalid("solver.k", "k ≥ 1 required"));
        }
        if self.solver.k > self.grid.n {
            return Err(invalid(
                "solver.k",
                format!("k ≤ n required, got k = {}", self.solver.k),
            ));
        }
        if !(self.solver.tol > 0.0) {
            return Err(invalid("solver.tol", "tol > 0 required"));
        }
        if self.solver.max_iter == 0 {
            return Err(invalid("solver.max_iter", "max_iter ≥ 1 required"));
        }
        let e = &self.experiments;
        if e.z_values.iter().any(|z| !(z.is_finite() && *z > 0.0)) {
            return Err(invalid("experiments.z_values", "charges must be positive"));
        }
        let r = &e.commutator.r_values;
        if r.len() < 2 || r[0] <= 0.0 || r.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid(
                "experiments.commutator.r_values",
                "at least two positive increasing values required",
            ));
        }
        check_n("experiments.commutator.n", e.commutator.n)?;
        if !(e.commutator.s > 0.0) {
            return Err(invalid("experiments.commutator.s", "s > 0 required"));
        }
        let eta = &e.scaling.eta_values;
        if eta.len() < 2 || eta.iter().any(|v| !(*v > 0.0 && *v <= 0.5)) || eta.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid(
                "experiments.scaling.eta_values",
                "at least two decreasing values in (0, 0.5] required",
            ));
        }
        let c = &e.critical;
        if c.z_values.iter().any(|z| !(*z > 0.0)) {
            return Err(invalid("experiments.critical.z_values", "charges must be positive"));
        }
        if c.settings.sizes.len() < 2 || c.settings.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(
                "experiments.critical.sizes",
                "at least two increasing sizes required",
            ));
        }
        for &n in &c.settings.sizes {
            check_n("experiments.critical.sizes", n)?;
        }
        check_n("experiments.inequalities.n", e.inequalities.n)?;
        check_n("experiments.dtn.n", e.dtn.n)?;
        check_n("experiments.nonrel.n", e.nonrel.n)?;
        if e.nonrel.levels < 1 {
            return Err(invalid("experiments.nonrel.levels", "levels ≥ 1 required"));
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "at least one format required"));
        }
        Ok(())
    }
}

fn check_n(key: &str, n: usize) -> Result<(), ConfigError> {
    if n < MIN_NODES {
        return Err(invalid(key, format!("n ≥ {MIN_NODES} required, got {n}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn set(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn empty_config_is_default() {
        let c = RunConfig::from_parts(None, &[]).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.params.c, 137.035999084);
        assert_eq!(
            (c.params.m, c.channel.kappa, c.grid.n, c.solver.route),
            (1.0, -1, 200, Route::Both)
        );
    }

    #[test]
    fn overrides_beat_the_file() {
        let file = json!({"params": {"z": 1.0}, "grid": {"n": 64}});
        let c = RunConfig::from_parts(Some(&file), &set(&["Z=2"])).unwrap();
        assert_eq!(c.params.z, 2.0);
        assert_eq!(c.grid.n, 64);
        let c = RunConfig::from_parts(
            Some(&file),
            &set(&["grid.scheme=galerkin", "experiments.commutator.r_values=[1,2,3]"]),
        )
        .unwrap();
        assert_eq!(c.grid.scheme, SchemeChoice::Galerkin);
        assert_eq!(c.experiments.commutator.r_values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn errors_name_the_key() {
        let err = RunConfig::from_parts(None, &set(&["grid.n=4"])).unwrap_err();
        assert!(
            matches!(&err, ConfigError::Invalid { key, message } if key == "grid.n" && message.contains("n ≥ 16")),
            "{err}"
        );
        let err = RunConfig::from_parts(None, &set(&["grid.bogus=1"])).unwrap_err();
        assert!(matches!(&err, ConfigError::UnknownKey(k) if k == "grid.bogus"));
        let err = RunConfig::from_parts(None, &set(&["grid.n=many"])).unwrap_err();
        assert!(
            matches!(&err, ConfigError::Invalid { key, .. } if key == "grid.n"),
            "{err}"
        );
        let err = RunConfig::from_parts(None, &set(&["solver.route=sideways"])).unwrap_err();
        assert!(err.to_string().contains("solver.route"), "{err}");
        let err =
            RunConfig::from_parts(Some(&json!({"experiments": {"critical": {"sizes": [400, 200]}}})), &[]).unwrap_err();
        assert!(err.to_string().contains("experiments.critical.sizes"));
        assert!(matches!(
            RunConfig::from_parts(None, &set(&["novalue"])),
            Err(ConfigError::MalformedOverride(_))
        ));
    }

    #[test]
    fn auto_scheme() {
        assert_eq!(SchemeChoice::Auto.resolve(&PhysParams::atomic(100.0)), Scheme::Nystrom);
        assert_eq!(SchemeChoice::Auto.resolve(&PhysParams::atomic(120.0)), Scheme::Galerkin);
    }
}
