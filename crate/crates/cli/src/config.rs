//! Run configuration: a flat TOML table plus `--key value` overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use nmcm_core::benchmark::{LorentzianParams, Model};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Discrete,
    Continuum,
    Benchmark,
    Certify,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Discrete => "discrete",
            Scenario::Continuum => "continuum",
            Scenario::Benchmark => "benchmark",
            Scenario::Certify => "certify",
        }
    }

    fn keys(&self) -> &'static [&'static str] {
        match self {
            Scenario::Discrete => &["n_steps", "p", "tau", "seed", "output_dir"],
            Scenario::Continuum => &["gamma", "t_max", "n_points", "tol", "seed", "output_dir"],
            Scenario::Benchmark | Scenario::Certify => {
                &["gamma0", "lambda", "t_max", "n_points", "models", "tol", "output_dir"]
            }
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Model list written either as a TOML array or a comma-separated string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ModelList {
    List(Vec<String>),
    Joined(String),
}

impl ModelList {
    fn names(&self) -> Vec<String> {
        match self {
            ModelList::List(v) => v.clone(),
            ModelList::Joined(s) => s
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Scenario,
    n_steps: Option<usize>,
    p: Option<f64>,
    tau: Option<f64>,
    gamma: Option<f64>,
    gamma0: Option<f64>,
    lambda: Option<f64>,
    t_max: Option<f64>,
    n_points: Option<usize>,
    models: Option<ModelList>,
    tol: Option<f64>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

/// A validated configuration with every applicable key filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub models: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
}

/// Largest chain length accepted by the discrete scenario (the brute-force
/// state lives on `2^(n+1)` dimensions).
pub const MAX_DISCRETE_STEPS: usize = 10;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Integers, then floats, otherwise a string.
fn parse_scalar(text: &str) -> toml::Value {
    if let Ok(i) = text.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = text.parse::<f64>() {
        toml::Value::Float(f)
    } else {
        toml::Value::String(text.to_string())
    }
}

/// Splits `--key value` pairs; `--key=value` is accepted too, dashes in keys
/// read as underscores and `--out` is an alias of `--output_dir`.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            return Err(invalid(format!("unexpected argument `{arg}`, expected --key value")));
        };
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| invalid(format!("missing value for --{flag}")))?;
                (flag.to_string(), v.clone())
            }
        };
        let key = match key.replace('-', "_") {
            k if k == "out" => "output_dir".to_string(),
            k => k,
        };
        out.push((key, value));
    }
    Ok(out)
}

impl RunConfig {
    /// Reads the optional config file, applies overrides (which win) and validates.
    pub fn load(scenario: Scenario, path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| invalid(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| invalid(format!("config {}: {}", p.display(), e.message())))?
            }
            None => toml::Table::new(),
        };
        for (key, value) in overrides {
            let v = if key == "output_dir" || key == "models" {
                toml::Value::String(value.clone())
            } else {
                parse_scalar(value)
            };
            table.insert(key.clone(), v);
        }
        table.insert("scenario".into(), toml::Value::String(scenario.name().into()));
        Self::from_table(table)
    }

    /// Parses a TOML document (which must name the scenario) and validates it.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table = text.parse::<toml::Table>().map_err(|e| invalid(e.message().to_string()))?;
        Self::from_table(table)
    }

    fn from_table(mut table: toml::Table) -> Result<Self, CliError> {
        // integers are valid wherever a real is expected
        for key in ["p", "tau", "gamma", "gamma0", "lambda", "t_max", "tol"] {
            if let Some(toml::Value::Integer(i)) = table.get(key) {
                let f = *i as f64;
                table.insert(key.into(), toml::Value::Float(f));
            }
        }
        let raw: RawConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| invalid(e.message().to_string()))?;
        Self::resolve(raw)
    }

    /// Re-parses a config echo as written to `report.json`.
    pub fn from_echo(value: &serde_json::Value) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_value(value.clone()).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(raw: RawConfig) -> Result<Self, CliError> {
        let scenario = raw.scenario;
        let given: Vec<(&str, bool)> = vec![
            ("n_steps", raw.n_steps.is_some()),
            ("p", raw.p.is_some()),
            ("tau", raw.tau.is_some()),
            ("gamma", raw.gamma.is_some()),
            ("gamma0", raw.gamma0.is_some()),
            ("lambda", raw.lambda.is_some()),
            ("t_max", raw.t_max.is_some()),
            ("n_points", raw.n_points.is_some()),
            ("models", raw.models.is_some()),
            ("tol", raw.tol.is_some()),
            ("seed", raw.seed.is_some()),
        ];
        for (key, present) in given {
            if present && !scenario.keys().contains(&key) {
                return Err(invalid(format!("key `{key}` does not apply to scenario {scenario}")));
            }
        }
        let output_dir = raw
            .output_dir
            .ok_or_else(|| invalid("no output directory: pass --out <dir> or set output_dir"))?;
        let mut cfg = RunConfig {
            scenario,
            n_steps: None,
            p: None,
            tau: None,
            gamma: None,
            gamma0: None,
            lambda: None,
            t_max: None,
            n_points: None,
            models: None,
            tol: None,
            seed: None,
            output_dir,
        };
        match scenario {
            Scenario::Discrete => {
                cfg.n_steps = Some(raw.n_steps.unwrap_or(6));
                cfg.p = Some(raw.p.unwrap_or(0.5));
                cfg.tau = Some(raw.tau.unwrap_or(0.3));
                cfg.seed = Some(raw.seed.unwrap_or(0));
            }
            Scenario::Continuum => {
                cfg.gamma = Some(raw.gamma.unwrap_or(1.0));
                cfg.t_max = Some(raw.t_max.unwrap_or(5.0));
                cfg.n_points = raw.n_points;
                cfg.tol = Some(raw.tol.unwrap_or(1e-8));
                cfg.seed = Some(raw.seed.unwrap_or(0));
            }
            Scenario::Benchmark | Scenario::Certify => {
                let gamma0 = raw.gamma0.unwrap_or(1.0);
                let lambda = raw.lambda.unwrap_or(0.1);
                cfg.gamma0 = Some(gamma0);
                cfg.lambda = Some(lambda);
                cfg.t_max = Some(raw.t_max.unwrap_or(10.0 / lambda));
                cfg.n_points = raw.n_points;
                let models = match raw.models {
                    Some(m) => m.names(),
                    None => Model::ALL.iter().map(|m| m.name().to_string()).collect(),
                };
                cfg.models = Some(models);
                cfg.tol = Some(raw.tol.unwrap_or(1e-8));
            }
        }
        cfg.validate()?;
        if cfg.n_points.is_none() {
            if let Some(n) = cfg.default_points()? {
                cfg.n_points = Some(n);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn default_points(&self) -> Result<Option<usize>, CliError> {
        let max_dt = match self.scenario {
            Scenario::Discrete => return Ok(None),
            Scenario::Continuum => return Ok(None),
            Scenario::Benchmark | Scenario::Certify => self.lorentzian()?.max_dt(),
        };
        let t_max = self.t_max.expect("resolved");
        let intervals = (t_max / max_dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(Some(intervals + 1))
    }

    pub fn lorentzian(&self) -> Result<LorentzianParams, CliError> {
        LorentzianParams::new(self.gamma0.unwrap_or(f64::NAN), self.lambda.unwrap_or(f64::NAN))
            .map_err(|e| invalid(e.to_string()))
    }

    /// The requested benchmark models, parsed.
    pub fn model_list(&self) -> Result<Vec<Model>, CliError> {
        let names = self.models.as_deref().unwrap_or_default();
        if names.is_empty() {
            return Err(invalid("model list is empty"));
        }
        names
            .iter()
            .map(|n| n.parse::<Model>().map_err(|e| invalid(e.to_string())))
            .collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(invalid(format!("{name} must be positive, got {x}"))),
            _ => Ok(()),
        };
        positive("tau", self.tau)?;
        positive("gamma0", self.gamma0)?;
        positive("lambda", self.lambda)?;
        positive("t_max", self.t_max)?;
        positive("tol", self.tol)?;
        if let Some(g) = self.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(invalid(format!("gamma must be nonnegative, got {g}")));
            }
        }
        if let Some(p) = self.p {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("p must lie in [0, 1], got {p}")));
            }
        }
        if let Some(n) = self.n_steps {
            if n == 0 || n > MAX_DISCRETE_STEPS {
                return Err(invalid(format!("n_steps must lie in 1..={MAX_DISCRETE_STEPS}, got {n}")));
            }
        }
        if let Some(n) = self.n_points {
            if n < 2 {
                return Err(invalid(format!("n_points must be at least 2, got {n}")));
            }
        }
        if self.models.is_some() {
            self.model_list()?;
        }
        if matches!(self.scenario, Scenario::Benchmark | Scenario::Certify) {
            let params = self.lorentzian()?;
            if let (Some(t_max), Some(n)) = (self.t_max, self.n_points) {
                let dt = t_max / (n - 1) as f64;
                if dt > params.max_dt() * (1.0 + 1e-9) {
                    return Err(invalid(format!(
                        "grid spacing {dt:.4e} exceeds {:.4e}; raise n_points",
                        params.max_dt()
                    )));
                }
            }
        }
        Ok(())
    }
}
