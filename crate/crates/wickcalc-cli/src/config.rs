//! Scenario files.
//!
//! ```json
//! {
//!   "model": "su2-sphere",
//!   "params": { "n": 1 },
//!   "suite": "quaternion",
//!   "checks": ["dimension-formula"],
//!   "out": "out/quaternion"
//! }
//! ```
//!
//! `params` keys depend on the model (see [`defaults`]); omitted keys take their defaults and
//! unknown keys are rejected. `suite` and `checks` are combined; with neither, suite `all` runs.

use serde::Deserialize;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use wickcalc::algebra::models::{self, ModelKind};
use wickcalc::tunneling::{DEFAULT_HBARS, HBAR_FLOOR};
use wickcalc::ModelData;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub suite: Option<String>,
    #[serde(default)]
    pub checks: Vec<String>,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CONFIG_INVALID: {}", self.0)
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Parameters of a resolved scenario. Fields a model does not use keep their defaults.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub kind: ModelKind,
    pub model: ModelData,
    pub n: usize,
    pub size: usize,
    pub hbar: f64,
    pub lambda: f64,
    pub hbars: Vec<f64>,
    pub seed: u64,
    pub pairs: usize,
    /// Resolved parameters echoed into every check result.
    pub inputs: Value,
}

/// Parameter names and default values per model.
pub fn defaults(kind: ModelKind) -> Vec<(&'static str, Value)> {
    let hbars = Value::from(DEFAULT_HBARS.to_vec());
    let mut v: Vec<(&'static str, Value)> = match kind {
        ModelKind::Su2Sphere => vec![("n", 1.into())],
        ModelKind::Su11Variant1 => vec![("a", 1.0.into()), ("hbar", 0.5.into()), ("size", 96.into())],
        ModelKind::Su11Variant2 => {
            vec![("a", 1.0.into()), ("hbar", 0.5.into()), ("size", 64.into()), ("pairs", 20.into())]
        }
        ModelKind::Zeeman => vec![("n", 6.into()), ("a2", 0.7.into()), ("hbar", 0.3.into()), ("pairs", 20.into())],
        ModelKind::Su11Prime => vec![("lambda", 1.0.into()), ("hbar", 1.0.into()), ("m", 16.into())],
        ModelKind::Cylinder => vec![
            ("mu", 1.0.into()),
            ("a0", 0.0.into()),
            ("hbar", 1.0.into()),
            ("m", 16.into()),
            ("hbars", hbars),
            ("hbar_window", Value::from(vec![0.5, 2.0])),
        ],
    };
    v.push(("seed", 2024.into()));
    v
}

pub fn registered_models() -> String {
    ModelKind::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
}

pub fn parse_kind(name: &str) -> Result<ModelKind, ConfigError> {
    ModelKind::from_name(name)
        .map_err(|_| invalid(format!("unknown model '{name}'; registered models: {}", registered_models())))
}

pub fn load(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn number(params: &BTreeMap<String, Value>, key: &str) -> Result<f64, ConfigError> {
    params[key].as_f64().filter(|v| v.is_finite()).ok_or_else(|| invalid(format!("'{key}' must be a number")))
}

fn count(params: &BTreeMap<String, Value>, key: &str, min: u64) -> Result<usize, ConfigError> {
    match params[key].as_u64() {
        Some(v) if v >= min => Ok(v as usize),
        _ => Err(invalid(format!("'{key}' must be an integer >= {min}"))),
    }
}

fn positive(params: &BTreeMap<String, Value>, key: &str) -> Result<f64, ConfigError> {
    let v = number(params, key)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(format!("'{key}' must be positive, got {v}")))
    }
}

fn numbers(params: &BTreeMap<String, Value>, key: &str) -> Result<Vec<f64>, ConfigError> {
    params[key]
        .as_array()
        .and_then(|a| a.iter().map(|v| v.as_f64()).collect::<Option<Vec<_>>>())
        .ok_or_else(|| invalid(format!("'{key}' must be an array of numbers")))
}

impl ScenarioConfig {
    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        let kind = parse_kind(&self.model)?;
        let defaults = defaults(kind);
        let mut params: BTreeMap<String, Value> = defaults.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        for (k, v) in &self.params {
            if !params.contains_key(k) {
                let known: Vec<_> = defaults.iter().map(|(k, _)| *k).collect();
                return Err(invalid(format!("unknown parameter '{k}' for {}; expected one of {}", kind, known.join(", "))));
            }
            params.insert(k.clone(), v.clone());
        }
        let seed = count(&params, "seed", 0)? as u64;
        let mut s = Scenario {
            kind,
            model: models::sphere(1),
            n: 1,
            size: 0,
            hbar: 0.0,
            lambda: 0.0,
            hbars: Vec::new(),
            seed,
            pairs: 0,
            inputs: Value::Null,
        };
        match kind {
            ModelKind::Su2Sphere => {
                s.n = count(&params, "n", 1)?;
                s.model = models::sphere(s.n);
                s.hbar = 2.0 / s.n as f64;
            }
            ModelKind::Su11Variant1 | ModelKind::Su11Variant2 => {
                let a = positive(&params, "a")?;
                s.hbar = positive(&params, "hbar")?;
                s.size = count(&params, "size", 8)?;
                s.model = if kind == ModelKind::Su11Variant1 {
                    models::su11_variant1(a, s.hbar)
                } else {
                    s.pairs = count(&params, "pairs", 1)?;
                    models::su11_variant2(a, s.hbar)
                };
            }
            ModelKind::Zeeman => {
                s.n = count(&params, "n", 1)?;
                s.hbar = positive(&params, "hbar")?;
                s.pairs = count(&params, "pairs", 1)?;
                s.model = models::zeeman(s.n, positive(&params, "a2")?, s.hbar);
            }
            ModelKind::Su11Prime => {
                s.lambda = positive(&params, "lambda")?;
                s.hbar = positive(&params, "hbar")?;
                s.size = count(&params, "m", 4)?;
                s.model = models::su11_prime(s.lambda, s.hbar);
            }
            ModelKind::Cylinder => {
                let mu = positive(&params, "mu")?;
                s.hbar = positive(&params, "hbar")?;
                s.size = count(&params, "m", 4)?;
                s.model = models::cylinder(mu, number(&params, "a0")?, s.hbar);
                let window = numbers(&params, "hbar_window")?;
                if window.len() != 2 || !(window[0] < window[1]) {
                    return Err(invalid("'hbar_window' must be [lo, hi] with lo < hi"));
                }
                if window[0] < HBAR_FLOOR {
                    return Err(invalid(format!(
                        "'hbar_window' starts at {} below the double-precision floor {HBAR_FLOOR} (PRECISION_FLOOR)",
                        window[0]
                    )));
                }
                s.hbars = numbers(&params, "hbars")?;
                if s.hbars.len() < 4 {
                    return Err(invalid("'hbars' needs at least four values for the exponent fit"));
                }
                if let Some(h) = s.hbars.iter().find(|h| !(window[0]..=window[1]).contains(*h)) {
                    return Err(invalid(format!("hbar {h} lies outside 'hbar_window' {window:?}")));
                }
            }
        }
        s.inputs = Value::Object(params.into_iter().collect());
        Ok(s)
    }
}
