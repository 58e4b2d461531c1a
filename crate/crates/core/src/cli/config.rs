//! Flat key-value experiment configuration: a JSON object whose keys may be
//! overridden one by one with `key=value` strings.

use std::f64::consts::{FRAC_PI_3, PI};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{ModelParams, OscillatorInit, ThermalEnv};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Json(String),
    #[error("config must be a JSON object")]
    NotAnObject,
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("override `{0}` is not of the form key=value")]
    MalformedOverride(String),
    #[error("invalid angle `{0}`")]
    BadAngle(String),
    #[error("both `g` and `g_tilde` given; exactly one is allowed")]
    DuplicateCoupling,
    #[error("inconsistent config: {0}")]
    Inconsistent(String),
}

fn bad(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Parses radians given either as a literal number or as a multiple of `pi`:
/// `pi`, `-pi`, `pi/3`, `2pi/3`, `2*pi/3`, `0.5pi`.
pub fn parse_angle(token: &str) -> Result<f64, ConfigError> {
    let fail = || ConfigError::BadAngle(token.to_string());
    let t = token.trim();
    if t.is_empty() {
        return Err(fail());
    }
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(fail()) };
    }
    let lower = t.to_ascii_lowercase();
    let (sign, body) = match lower.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, lower.strip_prefix('+').unwrap_or(&lower)),
    };
    let pos = body.find("pi").ok_or_else(fail)?;
    let coeff = body[..pos].trim_end_matches('*');
    let coeff = if coeff.is_empty() {
        1.0
    } else {
        coeff.parse::<f64>().map_err(|_| fail())?
    };
    let rest = &body[pos + 2..];
    let denom = if rest.is_empty() {
        1.0
    } else {
        rest.strip_prefix('/')
            .ok_or_else(fail)?
            .parse::<f64>()
            .map_err(|_| fail())?
    };
    let value = sign * coeff * PI / denom;
    if value.is_finite() && denom != 0.0 {
        Ok(value)
    } else {
        Err(fail())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Chi,
    ChiVsChiInfinity,
    ShortTime,
    PhiScan,
    BetaScan,
    MaxCondition,
    Validate,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Chi,
        Mode::ChiVsChiInfinity,
        Mode::ShortTime,
        Mode::PhiScan,
        Mode::BetaScan,
        Mode::MaxCondition,
        Mode::Validate,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Chi => "chi",
            Mode::ChiVsChiInfinity => "chi-vs-chi-infinity",
            Mode::ShortTime => "short-time",
            Mode::PhiScan => "phi-scan",
            Mode::BetaScan => "beta-scan",
            Mode::MaxCondition => "max-condition",
            Mode::Validate => "validate",
        }
    }
}

impl FromStr for Mode {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| bad("mode", format!("unknown mode `{s}`")))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

impl FromStr for Format {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(bad("format", format!("expected csv, json or svg, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    G(f64),
    GTilde(f64),
}

/// A scan value together with the label used in its column name.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeled {
    pub value: f64,
    pub label: String,
}

impl Labeled {
    fn angle(token: &str) -> Result<Self, ConfigError> {
        Ok(Self {
            value: parse_angle(token)?,
            label: token.trim().to_string(),
        })
    }

    fn number(value: f64) -> Self {
        Self {
            value,
            label: super::output::format_number(value),
        }
    }
}

pub const DEFAULT_TAU_MAX: f64 = 40.0;
pub const DEFAULT_TAU_POINTS: usize = 2001;
pub const DEFAULT_TAU_CUT: f64 = 0.05;
pub const DEFAULT_SHORT_TIME_POINTS: usize = 51;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mass: f64,
    pub omega: f64,
    pub delta: f64,
    pub coupling: Coupling,
    pub alpha_abs: f64,
    pub phi: f64,
    pub r: f64,
    pub theta: f64,
    pub beta: f64,
    /// Unset grid fields take mode-dependent defaults, see [`Self::tau_grid`].
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    pub tau_points: Option<usize>,
    pub mode: Mode,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub phi_values: Vec<Labeled>,
    pub beta_values: Vec<Labeled>,
    pub tau_cut: f64,
    pub late_min: f64,
    pub late_max: f64,
    pub psi_tolerance: f64,
}

impl Default for ExperimentConfig {
    /// Reference point: `M=1, Ω=5, r=1, θ=0, |α|=1, φ=π/3, g̃=½, Δ=1, β=10`.
    fn default() -> Self {
        // Built through the parser so labels re-read to identical values.
        let angle = |token: &str| Labeled::angle(token).expect("default angle token parses");
        Self {
            mass: 1.0,
            omega: 5.0,
            delta: 1.0,
            coupling: Coupling::GTilde(0.5),
            alpha_abs: 1.0,
            phi: FRAC_PI_3,
            r: 1.0,
            theta: 0.0,
            beta: 10.0,
            tau_min: None,
            tau_max: None,
            tau_points: None,
            mode: Mode::Chi,
            output: None,
            format: Format::Csv,
            phi_values: ["pi/2", "pi/4", "pi/6", "0"].into_iter().map(angle).collect(),
            beta_values: [10.0, 5.0, 2.0, 1.0].into_iter().map(Labeled::number).collect(),
            tau_cut: DEFAULT_TAU_CUT,
            late_min: 20.0,
            late_max: 40.0,
            psi_tolerance: crate::holevo::PSI_TOLERANCE,
        }
    }
}

/// A raw value from either a JSON document or a `key=value` override.
#[derive(Debug, Clone, Copy)]
enum Raw<'a> {
    Json(&'a Value),
    Text(&'a str),
}

impl Raw<'_> {
    fn as_str(&self) -> Option<&str> {
        match self {
            Raw::Json(Value::String(s)) => Some(s),
            Raw::Text(s) => Some(s),
            Raw::Json(_) => None,
        }
    }

    fn number(&self, key: &str) -> Result<f64, ConfigError> {
        let v = match (self, self.as_str()) {
            (Raw::Json(Value::Number(n)), _) => n.as_f64().ok_or_else(|| bad(key, "not representable as f64"))?,
            (_, Some(s)) => s.trim().parse::<f64>().map_err(|_| bad(key, format!("`{s}` is not a number")))?,
            (Raw::Json(other), None) => return Err(bad(key, format!("expected a number, got {other}"))),
            (Raw::Text(_), None) => unreachable!("text always has a string view"),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad(key, "must be finite"))
        }
    }

    fn angle(&self, key: &str) -> Result<Labeled, ConfigError> {
        match (self, self.as_str()) {
            (Raw::Json(Value::Number(_)), _) => self.number(key).map(Labeled::number),
            (_, Some(s)) => Labeled::angle(s),
            (_, None) => Err(bad(key, "expected an angle")),
        }
    }

    fn count(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.number(key)?;
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(bad(key, format!("expected a non-negative integer, got {v}")));
        }
        Ok(v as usize)
    }

    fn text(&self, key: &str) -> Result<String, ConfigError> {
        match self {
            Raw::Json(Value::String(s)) => Ok(s.clone()),
            Raw::Text(s) => Ok(s.to_string()),
            Raw::Json(other) => Err(bad(key, format!("expected a string, got {other}"))),
        }
    }

    /// Lists are JSON arrays or comma-separated text.
    fn list<T>(&self, key: &str, item: impl Fn(Raw<'_>) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
        let items: Vec<T> = match (self, self.as_str()) {
            (Raw::Json(Value::Array(values)), _) => values.iter().map(|v| item(Raw::Json(v))).collect::<Result<_, _>>()?,
            (_, Some(s)) => s
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| item(Raw::Text(p)))
                .collect::<Result<_, _>>()?,
            (_, None) => return Err(bad(key, "expected a list")),
        };
        if items.is_empty() {
            return Err(bad(key, "list is empty"));
        }
        Ok(items)
    }
}

pub const KEYS: [&str; 22] = [
    "M",
    "Omega",
    "Delta",
    "g",
    "g_tilde",
    "alpha_abs",
    "phi",
    "r",
    "theta",
    "beta",
    "tau_min",
    "tau_max",
    "tau_points",
    "mode",
    "output",
    "format",
    "phi_values",
    "beta_values",
    "tau_cut",
    "late_min",
    "late_max",
    "psi_tolerance",
];

impl ExperimentConfig {
    fn set(&mut self, key: &str, raw: Raw<'_>) -> Result<(), ConfigError> {
        match key {
            "M" => self.mass = raw.number(key)?,
            "Omega" => self.omega = raw.number(key)?,
            "Delta" => self.delta = raw.number(key)?,
            "g" => self.coupling = Coupling::G(raw.number(key)?),
            "g_tilde" => self.coupling = Coupling::GTilde(raw.number(key)?),
            "alpha_abs" => self.alpha_abs = raw.number(key)?,
            "phi" => self.phi = raw.angle(key)?.value,
            "r" => self.r = raw.number(key)?,
            "theta" => self.theta = raw.angle(key)?.value,
            "beta" => self.beta = raw.number(key)?,
            "tau_min" => self.tau_min = Some(raw.number(key)?),
            "tau_max" => self.tau_max = Some(raw.number(key)?),
            "tau_points" => self.tau_points = Some(raw.count(key)?),
            "mode" => self.mode = raw.text(key)?.parse()?,
            "output" => self.output = Some(PathBuf::from(raw.text(key)?)),
            "format" => self.format = raw.text(key)?.parse()?,
            "phi_values" => self.phi_values = raw.list(key, |r| r.angle(key))?,
            "beta_values" => self.beta_values = raw.list(key, |r| r.number(key).map(Labeled::number))?,
            "tau_cut" => self.tau_cut = raw.number(key)?,
            "late_min" => self.late_min = raw.number(key)?,
            "late_max" => self.late_max = raw.number(key)?,
            "psi_tolerance" => self.psi_tolerance = raw.number(key)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Builds a config from a JSON object on top of the defaults.
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        let map = value.as_object().ok_or(ConfigError::NotAnObject)?;
        if map.contains_key("g") && map.contains_key("g_tilde") {
            return Err(ConfigError::DuplicateCoupling);
        }
        let mut config = Self::default();
        for (key, v) in map {
            config.set(key, Raw::Json(v))?;
        }
        Ok(config)
    }

    /// Applies one `key=value` override; `g` and `g_tilde` share one slot.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::MalformedOverride(assignment.to_string()))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::MalformedOverride(assignment.to_string()));
        }
        self.set(key, Raw::Text(value.trim()))
    }

    /// Effective configuration as a JSON object that [`Self::from_json_str`]
    /// reads back to an equal config.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        let num = |v: f64| Value::from(v);
        map.insert("M".into(), num(self.mass));
        map.insert("Omega".into(), num(self.omega));
        map.insert("Delta".into(), num(self.delta));
        match self.coupling {
            Coupling::G(g) => map.insert("g".into(), num(g)),
            Coupling::GTilde(g) => map.insert("g_tilde".into(), num(g)),
        };
        map.insert("alpha_abs".into(), num(self.alpha_abs));
        map.insert("phi".into(), num(self.phi));
        map.insert("r".into(), num(self.r));
        map.insert("theta".into(), num(self.theta));
        map.insert("beta".into(), num(self.beta));
        if let Some(v) = self.tau_min {
            map.insert("tau_min".into(), num(v));
        }
        if let Some(v) = self.tau_max {
            map.insert("tau_max".into(), num(v));
        }
        if let Some(v) = self.tau_points {
            map.insert("tau_points".into(), Value::from(v));
        }
        map.insert("mode".into(), self.mode.as_str().into());
        if let Some(p) = &self.output {
            map.insert("output".into(), p.to_string_lossy().into_owned().into());
        }
        map.insert("format".into(), self.format.as_str().into());
        // Labels survive the round trip only as strings.
        let labels = |values: &[Labeled]| Value::Array(values.iter().map(|l| Value::from(l.label.clone())).collect());
        map.insert("phi_values".into(), labels(&self.phi_values));
        map.insert("beta_values".into(), Value::Array(self.beta_values.iter().map(|l| num(l.value)).collect()));
        map.insert("tau_cut".into(), num(self.tau_cut));
        map.insert("late_min".into(), num(self.late_min));
        map.insert("late_max".into(), num(self.late_max));
        map.insert("psi_tolerance".into(), num(self.psi_tolerance));
        Value::Object(map)
    }

    /// `(tau_min, tau_max, tau_points)` after mode defaults: `[0, 40]` with
    /// 2001 points, or `[0, tau_cut]` with 51 points in short-time mode.
    pub fn tau_grid_spec(&self) -> (f64, f64, usize) {
        let (max, points) = match self.mode {
            Mode::ShortTime => (self.tau_cut, DEFAULT_SHORT_TIME_POINTS),
            _ => (DEFAULT_TAU_MAX, DEFAULT_TAU_POINTS),
        };
        (
            self.tau_min.unwrap_or(0.0),
            self.tau_max.unwrap_or(max),
            self.tau_points.unwrap_or(points),
        )
    }

    pub fn tau_grid(&self) -> Vec<f64> {
        let (lo, hi, n) = self.tau_grid_spec();
        let step = (hi - lo) / (n - 1) as f64;
        (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
            .collect()
    }

    pub fn model(&self) -> Result<ModelParams, ConfigError> {
        let built = match self.coupling {
            Coupling::G(g) => ModelParams::new(self.mass, self.omega, self.delta, g),
            Coupling::GTilde(gt) => ModelParams::with_g_tilde(self.mass, self.omega, self.delta, gt),
        };
        built.map_err(|e| ConfigError::Inconsistent(e.to_string()))
    }

    pub fn init(&self) -> Result<OscillatorInit, ConfigError> {
        OscillatorInit::new(self.alpha_abs, self.phi, self.r, self.theta).map_err(|e| ConfigError::Inconsistent(e.to_string()))
    }

    pub fn env_for(&self, beta: f64, params: &ModelParams) -> Result<ThermalEnv, ConfigError> {
        ThermalEnv::for_model(beta, params).map_err(|e| ConfigError::Inconsistent(e.to_string()))
    }

    /// Checks every cross-field invariant and that the physics types accept
    /// the values.
    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (lo, hi, n) = self.tau_grid_spec();
        if n < 2 {
            return Err(bad("tau_points", format!("at least 2 points required, got {n}")));
        }
        if !(lo >= 0.0 && hi > lo) {
            return Err(ConfigError::Inconsistent(format!(
                "tau range requires tau_max > tau_min >= 0, got [{lo}, {hi}]"
            )));
        }
        if !(self.tau_cut > 0.0) {
            return Err(bad("tau_cut", "must be positive"));
        }
        if !(self.late_max > self.late_min && self.late_min >= 0.0) {
            return Err(ConfigError::Inconsistent(format!(
                "late window requires late_max > late_min >= 0, got [{}, {}]",
                self.late_min, self.late_max
            )));
        }
        if !(self.psi_tolerance >= 0.0) {
            return Err(bad("psi_tolerance", "must be non-negative"));
        }
        if self.mode == Mode::Validate && self.format == Format::Svg {
            return Err(bad("format", "validate mode has no numeric series to plot"));
        }
        let params = self.model()?;
        self.init()?.moments(&params).map_err(|e| ConfigError::Inconsistent(e.to_string()))?;
        self.env_for(self.beta, &params)?;
        for b in &self.beta_values {
            self.env_for(b.value, &params)?;
        }
        Ok(())
    }
}
