//! Scenario configuration.
//!
//! The grammar is TOML restricted to one top-level key and flat sections:
//!
//! ```toml
//! scenario = "propagate-kg"
//!
//! [medium]
//! omega_pe = 1.0
//! omega_pm = 1.0
//!
//! [pulse]
//! carrier = 0.3
//! width = 40.0
//!
//! [run]
//! x_end = 20.0
//! ```
//!
//! Parsing collects every violation (unknown key, type mismatch, missing
//! key, out-of-band value) with its key path instead of stopping at the first.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use super::pulse::{PulseShape, PulseSpec, Regime};
use crate::evolution::MuModel;
use crate::medium::{a_symbol, DrudeParams, Slowness, SPEED_OF_LIGHT, VACUUM_PERMEABILITY};
use crate::spectral::TimeGrid;

/// Samples per carrier period used to derive the default `grid.dt`.
pub const SAMPLES_PER_PERIOD: f64 = 32.0;

pub const DEFAULT_N: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Split,
    PropagateLinear,
    PropagateKg,
    PropagateNonlinear,
    PropagateUnidirectional,
    StationaryLinear,
    StationaryNonlinear,
    TaylorError,
    ReferenceCompare,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 9] = [
        ScenarioKind::Split,
        ScenarioKind::PropagateLinear,
        ScenarioKind::PropagateKg,
        ScenarioKind::PropagateNonlinear,
        ScenarioKind::PropagateUnidirectional,
        ScenarioKind::StationaryLinear,
        ScenarioKind::StationaryNonlinear,
        ScenarioKind::TaylorError,
        ScenarioKind::ReferenceCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Split => "split",
            ScenarioKind::PropagateLinear => "propagate-linear",
            ScenarioKind::PropagateKg => "propagate-kg",
            ScenarioKind::PropagateNonlinear => "propagate-nonlinear",
            ScenarioKind::PropagateUnidirectional => "propagate-unidirectional",
            ScenarioKind::StationaryLinear => "stationary-linear",
            ScenarioKind::StationaryNonlinear => "stationary-nonlinear",
            ScenarioKind::TaylorError => "taylor-error",
            ScenarioKind::ReferenceCompare => "reference-compare",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::Split => "split a boundary regime into right and left waves",
            ScenarioKind::PropagateLinear => "exact linear propagation of the directed waves",
            ScenarioKind::PropagateKg => "Klein-Gordon propagation with its error budget",
            ScenarioKind::PropagateNonlinear => "Kerr-coupled propagation of both waves",
            ScenarioKind::PropagateUnidirectional => "Kerr propagation of the right wave alone",
            ScenarioKind::StationaryLinear => "linear traveling profiles R and L",
            ScenarioKind::StationaryNonlinear => "nonlinear traveling-profile oscillator",
            ScenarioKind::TaylorError => "truncation error of the low-frequency slowness expansion",
            ScenarioKind::ReferenceCompare => "finite-difference time-domain cross-check",
        }
    }

    /// Keys without defaults, as `section.key`.
    pub fn required_keys(self) -> &'static [&'static str] {
        const PULSE: [&str; 4] = ["medium.omega_pe", "medium.omega_pm", "pulse.carrier", "pulse.width"];
        match self {
            ScenarioKind::Split => &PULSE,
            ScenarioKind::PropagateLinear
            | ScenarioKind::PropagateKg
            | ScenarioKind::PropagateNonlinear
            | ScenarioKind::PropagateUnidirectional => &[
                "medium.omega_pe",
                "medium.omega_pm",
                "pulse.carrier",
                "pulse.width",
                "run.x_end",
            ],
            ScenarioKind::StationaryLinear | ScenarioKind::StationaryNonlinear => {
                &["medium.omega_pe", "medium.omega_pm", "run.v"]
            }
            ScenarioKind::TaylorError => &["medium.omega_pe", "medium.omega_pm"],
            ScenarioKind::ReferenceCompare => &[
                "medium.omega_pe",
                "medium.omega_pm",
                "pulse.carrier",
                "pulse.width",
                "run.probes",
            ],
        }
    }

    fn uses_pulse(self) -> bool {
        !matches!(
            self,
            ScenarioKind::StationaryLinear | ScenarioKind::StationaryNonlinear | ScenarioKind::TaylorError
        )
    }

    /// Whether the run applies `â` on the whole grid.
    fn needs_slowness(self, regime: Regime) -> bool {
        match self {
            ScenarioKind::Split | ScenarioKind::PropagateLinear | ScenarioKind::ReferenceCompare => true,
            ScenarioKind::PropagateKg
            | ScenarioKind::PropagateNonlinear
            | ScenarioKind::PropagateUnidirectional => regime != Regime::ElectricOnly,
            _ => false,
        }
    }

    /// Whether the carrier must lie in the lower band `(0, min(p, q))`.
    fn low_frequency(self) -> bool {
        matches!(
            self,
            ScenarioKind::PropagateKg | ScenarioKind::PropagateNonlinear | ScenarioKind::PropagateUnidirectional
        )
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// `c = ε₀ = μ₀ = 1`.
    Normalized,
    /// SI vacuum constants.
    Si,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub dt: f64,
}

/// Scenario-specific settings; unused fields keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Propagation distance.
    pub x_end: f64,
    /// Number of x-stations written to the tables (excluding x = 0).
    pub stations: usize,
    /// Marching steps; defaults to the `Δx ≤ c/(50√(pq))` rule.
    pub n_steps: usize,
    pub dealias: bool,
    pub mu_model: MuModel,
    /// Profile speed for the stationary scenarios.
    pub v: f64,
    pub amplitude_r: f64,
    pub amplitude_l: f64,
    pub xi_start: f64,
    pub xi_end: f64,
    pub points: usize,
    /// Initial value and slope of the nonlinear profile.
    pub pi0: f64,
    pub dpi0: f64,
    /// Upper end of the Taylor-error sweep as a fraction of `ω_pe`.
    pub upper: f64,
    pub dx: f64,
    pub substeps: usize,
    pub x_ref: f64,
    pub probes: Vec<f64>,
    /// Relative L2 budget of the time-domain cross-check.
    pub budget: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            x_end: 0.0,
            stations: 10,
            n_steps: 0,
            dealias: true,
            mu_model: MuModel::Dominant,
            v: 0.0,
            amplitude_r: 1.0,
            amplitude_l: 1.0,
            xi_start: -5.0,
            xi_end: 5.0,
            points: 201,
            pi0: 0.0,
            dpi0: 1.0,
            upper: 0.95,
            dx: 0.05,
            substeps: 6,
            x_ref: 5.0,
            probes: Vec::new(),
            budget: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Table formats: `csv` and/or `json`.
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec!["csv".to_string()],
        }
    }
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub units: Units,
    pub medium: DrudeParams,
    pub grid: GridConfig,
    pub pulse: PulseSpec,
    pub run: RunConfig,
    pub output: OutputConfig,
    /// Keys that were filled from defaults, with the value used.
    pub defaulted: Vec<(String, String)>,
}

impl ScenarioConfig {
    pub fn time_grid(&self) -> crate::Result<TimeGrid> {
        TimeGrid::new(self.grid.n, self.grid.dt)
    }

    /// TOML text that parses back to this configuration.
    pub fn to_toml(&self) -> String {
        let mut root = Table::new();
        root.insert("scenario".into(), Value::String(self.scenario.name().into()));
        let mut medium = Table::new();
        medium.insert("units".into(), Value::String(units_name(self.units).into()));
        for (k, v) in [
            ("omega_pe", self.medium.omega_pe),
            ("omega_pm", self.medium.omega_pm),
            ("chi3", self.medium.chi3),
            ("c", self.medium.c),
            ("eps0", self.medium.eps0),
            ("mu0", self.medium.mu0),
        ] {
            medium.insert(k.into(), Value::Float(v));
        }
        root.insert("medium".into(), Value::Table(medium));

        let mut grid = Table::new();
        grid.insert("n".into(), Value::Integer(self.grid.n as i64));
        grid.insert("dt".into(), Value::Float(self.grid.dt));
        root.insert("grid".into(), Value::Table(grid));

        let p = &self.pulse;
        let mut pulse = Table::new();
        pulse.insert("shape".into(), Value::String(p.shape.name().into()));
        pulse.insert("regime".into(), Value::String(p.regime.name().into()));
        pulse.insert("carrier".into(), Value::Float(p.carrier));
        pulse.insert("width".into(), Value::Float(p.width));
        pulse.insert("amplitude".into(), Value::Float(p.amplitude));
        if let Some(c) = p.center {
            pulse.insert("center".into(), Value::Float(c));
        }
        if let Some(b) = p.band_limit {
            pulse.insert("band_limit".into(), Value::Float(b));
        }
        if let Some(f) = &p.file {
            pulse.insert("file".into(), Value::String(f.display().to_string()));
        }
        root.insert("pulse".into(), Value::Table(pulse));

        let r = &self.run;
        let mut run = Table::new();
        for key in run_keys(self.scenario) {
            let value = match *key {
                "x_end" => Value::Float(r.x_end),
                "stations" => Value::Integer(r.stations as i64),
                "n_steps" => Value::Integer(r.n_steps as i64),
                "dealias" => Value::Boolean(r.dealias),
                "mu_model" => Value::String(mu_model_name(r.mu_model).into()),
                "v" => Value::Float(r.v),
                "amplitude_r" => Value::Float(r.amplitude_r),
                "amplitude_l" => Value::Float(r.amplitude_l),
                "xi_start" => Value::Float(r.xi_start),
                "xi_end" => Value::Float(r.xi_end),
                "points" => Value::Integer(r.points as i64),
                "pi0" => Value::Float(r.pi0),
                "dpi0" => Value::Float(r.dpi0),
                "upper" => Value::Float(r.upper),
                "dx" => Value::Float(r.dx),
                "substeps" => Value::Integer(r.substeps as i64),
                "x_ref" => Value::Float(r.x_ref),
                "probes" => Value::Array(r.probes.iter().map(|&x| Value::Float(x)).collect()),
                "budget" => Value::Float(r.budget),
                _ => unreachable!("run_keys lists only known keys"),
            };
            run.insert((*key).into(), value);
        }
        root.insert("run".into(), Value::Table(run));

        let mut output = Table::new();
        output.insert("directory".into(), Value::String(self.output.directory.display().to_string()));
        output.insert(
            "formats".into(),
            Value::Array(self.output.formats.iter().cloned().map(Value::String).collect()),
        );
        root.insert("output".into(), Value::Table(output));
        toml::to_string(&root).expect("plain tables always serialize")
    }
}

fn units_name(u: Units) -> &'static str {
    match u {
        Units::Normalized => "normalized",
        Units::Si => "si",
    }
}

fn mu_model_name(m: MuModel) -> &'static str {
    match m {
        MuModel::Dominant => "dominant",
        MuModel::Full => "full",
    }
}

/// Keys of `[run]` that apply to a scenario.
pub fn run_keys(kind: ScenarioKind) -> &'static [&'static str] {
    match kind {
        ScenarioKind::Split => &[],
        ScenarioKind::PropagateLinear | ScenarioKind::PropagateKg => &["x_end", "stations"],
        ScenarioKind::PropagateNonlinear | ScenarioKind::PropagateUnidirectional => {
            &["x_end", "stations", "n_steps", "dealias", "mu_model"]
        }
        ScenarioKind::StationaryLinear => &["v", "amplitude_r", "amplitude_l", "xi_start", "xi_end", "points"],
        ScenarioKind::StationaryNonlinear => &["v", "pi0", "dpi0", "xi_end", "points"],
        ScenarioKind::TaylorError => &["upper", "points"],
        ScenarioKind::ReferenceCompare => &["dx", "substeps", "x_ref", "probes", "budget"],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    Syntax,
    UnknownKey,
    TypeMismatch,
    Missing,
    Invalid,
    Band,
}

/// One configuration violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub path: String,
    pub kind: IssueKind,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Every violation found in one configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl ConfigErrors {
    pub fn issues(&self) -> &[ConfigIssue] {
        &self.0
    }

    /// Whether some issue concerns `path`.
    pub fn mentions(&self, path: &str) -> bool {
        self.0.iter().any(|i| i.path == path)
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration ({} issue", self.0.len())?;
        if self.0.len() != 1 {
            f.write_str("s")?;
        }
        f.write_str(")")?;
        for issue in &self.0 {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// `section.key=value`. The value is read as a TOML value and falls back to a
/// bare string.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: Value,
}

pub fn parse_override(text: &str) -> Result<Override, ConfigErrors> {
    let fail = |message: String| {
        ConfigErrors(vec![ConfigIssue {
            path: String::new(),
            kind: IssueKind::Syntax,
            message,
        }])
    };
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| fail(format!("override {text:?} is not of the form key=value")))?;
    let key = key.trim();
    let path: Vec<String> = key.split('.').map(|s| s.trim().to_string()).collect();
    let valid_part = |s: &String| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if path.len() > 2 || !path.iter().all(valid_part) {
        return Err(fail(format!("override key {key:?} must be `key` or `section.key`")));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_string()),
    };
    Ok(Override { path, value })
}

fn apply_override(root: &mut Table, ov: &Override) -> Result<(), ConfigIssue> {
    let path = ov.path.join(".");
    match ov.path.as_slice() {
        [key] => {
            root.insert(key.clone(), ov.value.clone());
            Ok(())
        }
        [section, key] => {
            let entry = root
                .entry(section.clone())
                .or_insert_with(|| Value::Table(Table::new()));
            match entry {
                Value::Table(t) => {
                    t.insert(key.clone(), ov.value.clone());
                    Ok(())
                }
                _ => Err(ConfigIssue {
                    path,
                    kind: IssueKind::TypeMismatch,
                    message: format!("{section} is not a section"),
                }),
            }
        }
        _ => Err(ConfigIssue {
            path,
            kind: IssueKind::Syntax,
            message: "override key must have one or two parts".into(),
        }),
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    parse_config_with(text, &[])
}

/// Parse, apply `overrides` in order, then validate.
pub fn parse_config_with(text: &str, overrides: &[Override]) -> Result<ScenarioConfig, ConfigErrors> {
    let mut root: Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![ConfigIssue {
            path: String::new(),
            kind: IssueKind::Syntax,
            message: e.message().to_string(),
        }])
    })?;
    let mut issues = Vec::new();
    for ov in overrides {
        if let Err(issue) = apply_override(&mut root, ov) {
            issues.push(issue);
        }
    }
    let mut v = Validator {
        issues,
        defaulted: Vec::new(),
    };
    let config = v.config(&root);
    match config {
        Some(c) if v.issues.is_empty() => Ok(ScenarioConfig {
            defaulted: v.defaulted,
            ..c
        }),
        _ => Err(ConfigErrors(v.issues)),
    }
}

struct Validator {
    issues: Vec<ConfigIssue>,
    defaulted: Vec<(String, String)>,
}

/// Reader over one section that remembers which keys were consumed.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
    seen: BTreeSet<&'a str>,
}

impl<'a> Section<'a> {
    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn has(&self, key: &str) -> bool {
        self.table.is_some_and(|t| t.contains_key(key))
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        let table = self.table?;
        let (k, v) = table.get_key_value(key)?;
        self.seen.insert(k.as_str());
        Some(v)
    }
}

impl Validator {
    fn issue(&mut self, path: impl Into<String>, kind: IssueKind, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            path: path.into(),
            kind,
            message: message.into(),
        });
    }

    fn section<'a>(&mut self, root: &'a Table, name: &'static str) -> Section<'a> {
        let table = match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.issue(name, IssueKind::TypeMismatch, "expected a section");
                None
            }
        };
        Section {
            name,
            table,
            seen: BTreeSet::new(),
        }
    }

    /// Report keys of `section` that were never read.
    fn finish(&mut self, section: Section<'_>, context: &str) {
        if let Some(t) = section.table {
            for (k, v) in t {
                if !section.seen.contains(k.as_str()) {
                    let what = if matches!(v, Value::Table(_)) { "nested section" } else { "key" };
                    self.issue(section.path(k), IssueKind::UnknownKey, format!("unknown {what}{context}"));
                }
            }
        }
    }

    fn float(&mut self, s: &mut Section<'_>, key: &'static str) -> Option<f64> {
        match s.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.issue(s.path(key), IssueKind::TypeMismatch, format!("expected a number, found {}", other.type_str()));
                None
            }
        }
    }

    fn float_or(&mut self, s: &mut Section<'_>, key: &'static str, default: f64) -> f64 {
        self.float(s, key).unwrap_or_else(|| {
            self.defaulted.push((s.path(key), default.to_string()));
            default
        })
    }

    fn count(&mut self, s: &mut Section<'_>, key: &'static str) -> Option<usize> {
        match s.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as usize),
            Value::Integer(_) => {
                self.issue(s.path(key), IssueKind::Invalid, "must be non-negative");
                None
            }
            other => {
                self.issue(s.path(key), IssueKind::TypeMismatch, format!("expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn count_or(&mut self, s: &mut Section<'_>, key: &'static str, default: usize) -> usize {
        self.count(s, key).unwrap_or_else(|| {
            self.defaulted.push((s.path(key), default.to_string()));
            default
        })
    }

    fn boolean_or(&mut self, s: &mut Section<'_>, key: &'static str, default: bool) -> bool {
        match s.get(key) {
            Some(Value::Boolean(b)) => *b,
            Some(other) => {
                self.issue(s.path(key), IssueKind::TypeMismatch, format!("expected a boolean, found {}", other.type_str()));
                default
            }
            None => {
                self.defaulted.push((s.path(key), default.to_string()));
                default
            }
        }
    }

    fn string<'a>(&mut self, s: &mut Section<'a>, key: &'static str) -> Option<&'a str> {
        match s.get(key)? {
            Value::String(v) => Some(v.as_str()),
            other => {
                self.issue(s.path(key), IssueKind::TypeMismatch, format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    /// A string drawn from `choices`, or `default` when absent.
    fn choice<T: Copy>(&mut self, s: &mut Section<'_>, key: &'static str, choices: &[(&str, T)], default: T) -> T {
        match self.string(s, key).map(str::to_owned) {
            Some(v) => match choices.iter().find(|(n, _)| *n == v) {
                Some((_, t)) => *t,
                None => {
                    let names: Vec<&str> = choices.iter().map(|(n, _)| *n).collect();
                    self.issue(s.path(key), IssueKind::Invalid, format!("{v:?} is not one of {names:?}"));
                    default
                }
            },
            None => {
                if !s.has(key) {
                    let name = choices.iter().map(|(n, _)| *n).next().unwrap_or_default();
                    self.defaulted.push((s.path(key), name.to_string()));
                }
                default
            }
        }
    }

    fn float_list(&mut self, s: &mut Section<'_>, key: &'static str) -> Option<Vec<f64>> {
        match s.get(key)? {
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    match item {
                        Value::Float(f) => out.push(*f),
                        Value::Integer(n) => out.push(*n as f64),
                        other => {
                            self.issue(
                                format!("{}[{i}]", s.path(key)),
                                IssueKind::TypeMismatch,
                                format!("expected a number, found {}", other.type_str()),
                            );
                            return None;
                        }
                    }
                }
                Some(out)
            }
            other => {
                self.issue(s.path(key), IssueKind::TypeMismatch, format!("expected an array, found {}", other.type_str()));
                None
            }
        }
    }

    fn require<T>(&mut self, path: &str, value: Option<T>, present: bool) -> Option<T> {
        if value.is_none() && !present {
            self.issue(path, IssueKind::Missing, "required key is missing");
        }
        value
    }

    fn positive(&mut self, path: &str, value: f64) {
        if !(value > 0.0 && value.is_finite()) {
            self.issue(path, IssueKind::Invalid, format!("must be positive and finite, got {value}"));
        }
    }

    fn config(&mut self, root: &Table) -> Option<ScenarioConfig> {
        for (k, v) in root {
            let known = matches!(k.as_str(), "scenario" | "medium" | "grid" | "pulse" | "run" | "output");
            if !known {
                self.issue(k.as_str(), IssueKind::UnknownKey, "unknown top-level key");
            } else if k != "scenario" && !matches!(v, Value::Table(_)) {
                self.issue(k.as_str(), IssueKind::TypeMismatch, "expected a section");
            }
        }
        let scenario = match root.get("scenario") {
            Some(Value::String(name)) => match ScenarioKind::from_name(name) {
                Some(k) => Some(k),
                None => {
                    self.issue("scenario", IssueKind::Invalid, format!("unknown scenario {name:?}"));
                    None
                }
            },
            Some(other) => {
                self.issue("scenario", IssueKind::TypeMismatch, format!("expected a string, found {}", other.type_str()));
                None
            }
            None => {
                self.issue("scenario", IssueKind::Missing, "required key is missing");
                None
            }
        };
        // Without a scenario the scenario-specific sections cannot be checked.
        let scenario = scenario?;

        let (units, medium) = self.medium(root);
        let pulse = self.pulse(root, scenario);
        let grid = self.grid(root, scenario, pulse.as_ref());
        let run = self.run(root, scenario, medium.as_ref());
        let output = self.output(root);

        let (medium, pulse, grid) = (medium?, pulse?, grid?);
        self.bands(scenario, &medium, &pulse, &grid, &run);
        Some(ScenarioConfig {
            scenario,
            units,
            medium,
            grid,
            pulse,
            run,
            output,
            defaulted: Vec::new(),
        })
    }

    fn medium(&mut self, root: &Table) -> (Units, Option<DrudeParams>) {
        let mut s = self.section(root, "medium");
        let units = self.choice(&mut s, "units", &[("normalized", Units::Normalized), ("si", Units::Si)], Units::Normalized);
        let (has_pe, has_pm) = (s.has("omega_pe"), s.has("omega_pm"));
        let pe = self.float(&mut s, "omega_pe");
        let pe = self.require("medium.omega_pe", pe, has_pe);
        let pm = self.float(&mut s, "omega_pm");
        let pm = self.require("medium.omega_pm", pm, has_pm);
        let chi3 = self.float_or(&mut s, "chi3", 0.0);
        let (dc, deps, dmu) = match units {
            Units::Normalized => (1.0, 1.0, 1.0),
            Units::Si => (
                SPEED_OF_LIGHT,
                1.0 / (VACUUM_PERMEABILITY * SPEED_OF_LIGHT * SPEED_OF_LIGHT),
                VACUUM_PERMEABILITY,
            ),
        };
        let c = self.float_or(&mut s, "c", dc);
        let eps0 = self.float_or(&mut s, "eps0", deps);
        let mu0 = self.float_or(&mut s, "mu0", dmu);
        self.finish(s, "");
        if chi3 < 0.0 {
            self.issue("medium.chi3", IssueKind::Invalid, format!("chi3 = {chi3} must be non-negative"));
        }
        for (key, v) in [("medium.omega_pe", pe), ("medium.omega_pm", pm)] {
            if let Some(v) = v {
                self.positive(key, v);
            }
        }
        for (key, v) in [("medium.c", c), ("medium.eps0", eps0), ("medium.mu0", mu0)] {
            self.positive(key, v);
        }
        let (pe, pm) = match (pe, pm) {
            (Some(a), Some(b)) => (a, b),
            _ => return (units, None),
        };
        if chi3 < 0.0 {
            return (units, None);
        }
        match DrudeParams::new(pe, pm, c, eps0, mu0, chi3) {
            Ok(p) => (units, Some(p)),
            Err(e) => {
                // Individual positivity issues are already reported above.
                if pe > 0.0 && pm > 0.0 && c > 0.0 && eps0 > 0.0 && mu0 > 0.0 {
                    self.issue("medium", IssueKind::Invalid, e.to_string());
                }
                (units, None)
            }
        }
    }

    fn pulse(&mut self, root: &Table, scenario: ScenarioKind) -> Option<PulseSpec> {
        let mut s = self.section(root, "pulse");
        if !scenario.uses_pulse() {
            // Accept and ignore a pulse section for pulse-free scenarios.
            if let Some(t) = s.table {
                for k in t.keys() {
                    s.seen.insert(k.as_str());
                }
            }
            return Some(PulseSpec::default());
        }
        let shape = self.choice(
            &mut s,
            "shape",
            &[("gaussian-modulated", PulseShape::GaussianModulated), ("user-file", PulseShape::UserFile)],
            PulseShape::GaussianModulated,
        );
        let regime = self.choice(
            &mut s,
            "regime",
            &[
                ("right-going", Regime::RightGoing),
                ("left-going", Regime::LeftGoing),
                ("electric-only", Regime::ElectricOnly),
            ],
            Regime::RightGoing,
        );
        let (has_carrier, has_width) = (s.has("carrier"), s.has("width"));
        let carrier = self.float(&mut s, "carrier");
        let carrier = self.require("pulse.carrier", carrier, has_carrier);
        let width = match shape {
            PulseShape::GaussianModulated => {
                let w = self.float(&mut s, "width");
                self.require("pulse.width", w, has_width)
            }
            PulseShape::UserFile => Some(self.float(&mut s, "width").unwrap_or(0.0)),
        };
        let amplitude = self.float_or(&mut s, "amplitude", 1.0);
        let center = self.float(&mut s, "center");
        let band_limit = self.float(&mut s, "band_limit");
        let has_file = s.has("file");
        let file = self.string(&mut s, "file").map(PathBuf::from);
        self.finish(s, "");

        if shape == PulseShape::UserFile && file.is_none() && !has_file {
            self.issue("pulse.file", IssueKind::Missing, "required for shape = \"user-file\"");
        }
        if let Some(c) = carrier {
            self.positive("pulse.carrier", c);
        }
        if let (PulseShape::GaussianModulated, Some(w)) = (shape, width) {
            self.positive("pulse.width", w);
        }
        if let Some(b) = band_limit {
            self.positive("pulse.band_limit", b);
        }
        if !(amplitude.is_finite() && amplitude != 0.0) {
            self.issue("pulse.amplitude", IssueKind::Invalid, "must be finite and nonzero");
        }
        Some(PulseSpec {
            shape,
            regime,
            carrier: carrier?,
            width: width?,
            amplitude,
            center,
            band_limit,
            file,
        })
    }

    fn grid(&mut self, root: &Table, scenario: ScenarioKind, pulse: Option<&PulseSpec>) -> Option<GridConfig> {
        let mut s = self.section(root, "grid");
        let n = self.count_or(&mut s, "n", DEFAULT_N);
        let dt = match self.float(&mut s, "dt") {
            Some(dt) => dt,
            None => {
                let carrier = pulse.map(|p| p.carrier).filter(|c| *c > 0.0 && scenario.uses_pulse());
                let dt = carrier.map_or(1.0, |c| 2.0 * std::f64::consts::PI / (SAMPLES_PER_PERIOD * c));
                self.defaulted.push(("grid.dt".into(), dt.to_string()));
                dt
            }
        };
        self.finish(s, "");
        match TimeGrid::new(n, dt) {
            Ok(_) => Some(GridConfig { n, dt }),
            Err(e) => {
                let path = if n >= 8 && n.is_power_of_two() { "grid.dt" } else { "grid.n" };
                self.issue(path, IssueKind::Invalid, e.to_string());
                None
            }
        }
    }

    fn run(&mut self, root: &Table, scenario: ScenarioKind, medium: Option<&DrudeParams>) -> RunConfig {
        let mut s = self.section(root, "run");
        let mut r = RunConfig::default();
        for key in run_keys(scenario) {
            let path = s.path(key);
            match *key {
                "x_end" => {
                    let has = s.has(key);
                    let v = self.float(&mut s, "x_end");
                    if let Some(v) = self.require(&path, v, has) {
                        self.positive(&path, v);
                        r.x_end = v;
                    }
                }
                "v" => {
                    let has = s.has(key);
                    let v = self.float(&mut s, "v");
                    if let Some(v) = self.require(&path, v, has) {
                        self.positive(&path, v);
                        r.v = v;
                    }
                }
                "probes" => {
                    let has = s.has(key);
                    let v = self.float_list(&mut s, "probes");
                    if let Some(v) = self.require(&path, v, has) {
                        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                            self.issue(&path, IssueKind::Invalid, "needs at least one finite position");
                        }
                        r.probes = v;
                    }
                }
                "stations" => r.stations = self.count_or(&mut s, "stations", r.stations),
                "n_steps" => {
                    r.n_steps = match self.count(&mut s, "n_steps") {
                        Some(n) => n,
                        None => {
                            let n = medium.map_or(0, |m| crate::evolution::default_steps(r.x_end, m));
                            self.defaulted.push((path.clone(), n.to_string()));
                            n
                        }
                    };
                    if r.n_steps < 4 {
                        self.issue(&path, IssueKind::Invalid, "must be at least 4");
                    }
                }
                "dealias" => r.dealias = self.boolean_or(&mut s, "dealias", r.dealias),
                "mu_model" => {
                    r.mu_model = self.choice(
                        &mut s,
                        "mu_model",
                        &[("dominant", MuModel::Dominant), ("full", MuModel::Full)],
                        MuModel::Dominant,
                    )
                }
                "amplitude_r" => r.amplitude_r = self.float_or(&mut s, "amplitude_r", r.amplitude_r),
                "amplitude_l" => r.amplitude_l = self.float_or(&mut s, "amplitude_l", r.amplitude_l),
                "xi_start" => r.xi_start = self.float_or(&mut s, "xi_start", r.xi_start),
                "xi_end" => {
                    r.xi_end = self.float_or(&mut s, "xi_end", r.xi_end);
                    if scenario == ScenarioKind::StationaryNonlinear {
                        self.positive(&path, r.xi_end);
                    }
                }
                "points" => {
                    r.points = self.count_or(&mut s, "points", r.points);
                    if r.points < 5 {
                        self.issue(&path, IssueKind::Invalid, "must be at least 5");
                    }
                }
                "pi0" => r.pi0 = self.float_or(&mut s, "pi0", r.pi0),
                "dpi0" => r.dpi0 = self.float_or(&mut s, "dpi0", r.dpi0),
                "upper" => {
                    r.upper = self.float_or(&mut s, "upper", r.upper);
                    self.positive(&path, r.upper);
                }
                "dx" => {
                    r.dx = self.float_or(&mut s, "dx", r.dx);
                    self.positive(&path, r.dx);
                }
                "substeps" => {
                    r.substeps = self.count_or(&mut s, "substeps", r.substeps);
                    if r.substeps == 0 {
                        self.issue(&path, IssueKind::Invalid, "must be at least 1");
                    }
                }
                "x_ref" => r.x_ref = self.float_or(&mut s, "x_ref", r.x_ref),
                "budget" => {
                    r.budget = self.float_or(&mut s, "budget", r.budget);
                    self.positive(&path, r.budget);
                }
                _ => unreachable!("run_keys lists only handled keys"),
            }
        }
        if scenario == ScenarioKind::StationaryLinear && r.xi_end <= r.xi_start {
            self.issue("run.xi_end", IssueKind::Invalid, "must exceed run.xi_start");
        }
        if scenario == ScenarioKind::ReferenceCompare && r.probes.iter().any(|&x| x < r.x_ref) {
            self.issue("run.probes", IssueKind::Invalid, "probes must lie at or beyond run.x_ref");
        }
        if scenario == ScenarioKind::ReferenceCompare && r.x_ref < 0.0 {
            self.issue("run.x_ref", IssueKind::Invalid, "must be non-negative");
        }
        self.finish(s, &format!(" for scenario {scenario}"));
        r
    }

    fn output(&mut self, root: &Table) -> OutputConfig {
        let mut s = self.section(root, "output");
        let mut out = OutputConfig::default();
        match self.string(&mut s, "directory") {
            Some(d) => out.directory = PathBuf::from(d),
            None => self.defaulted.push(("output.directory".into(), "out".into())),
        }
        let has_formats = s.has("formats");
        if let Some(v) = s.get("formats") {
            match v {
                Value::Array(items) => {
                    let mut formats = Vec::new();
                    for (i, item) in items.iter().enumerate() {
                        match item.as_str() {
                            Some(f @ ("csv" | "json")) => formats.push(f.to_string()),
                            _ => self.issue(
                                format!("output.formats[{i}]"),
                                IssueKind::Invalid,
                                "allowed formats are \"csv\" and \"json\"",
                            ),
                        }
                    }
                    formats.dedup();
                    out.formats = formats;
                }
                other => self.issue(
                    "output.formats",
                    IssueKind::TypeMismatch,
                    format!("expected an array, found {}", other.type_str()),
                ),
            }
        } else if !has_formats {
            self.defaulted.push(("output.formats".into(), "[\"csv\"]".into()));
        }
        self.finish(s, "");
        out
    }

    /// Frequency-band checks that need the medium, the pulse and the grid.
    fn bands(&mut self, scenario: ScenarioKind, m: &DrudeParams, pulse: &PulseSpec, grid: &GridConfig, run: &RunConfig) {
        if scenario.uses_pulse() {
            let w0 = pulse.carrier;
            let (lo, hi) = (m.lower_edge(), m.upper_edge());
            if scenario.low_frequency() {
                if w0 >= lo {
                    self.issue(
                        "pulse.carrier",
                        IssueKind::Band,
                        format!("carrier {w0} must lie in the lower band (0, {lo}) for {scenario}"),
                    );
                }
            } else if w0 > lo && w0 < hi {
                self.issue(
                    "pulse.carrier",
                    IssueKind::Band,
                    format!("carrier {w0} lies in the evanescent band ({lo}, {hi})"),
                );
            }
            if let Ok(tg) = TimeGrid::new(grid.n, grid.dt) {
                if w0 >= tg.nyquist() {
                    self.issue(
                        "pulse.carrier",
                        IssueKind::Band,
                        format!("carrier {w0} is not below the grid Nyquist frequency {}", tg.nyquist()),
                    );
                }
                if scenario.needs_slowness(pulse.regime) {
                    let bad = (1..tg.n()).map(|k| tg.omega(k).abs()).find(|&w| {
                        matches!(a_symbol(m, w), Ok(Slowness::Evanescent { .. }))
                    });
                    if let Some(w) = bad {
                        self.issue(
                            "grid.dt",
                            IssueKind::Band,
                            format!("grid bin at omega = {w} lies in the evanescent band ({lo}, {hi}); reduce the Nyquist frequency below {lo}"),
                        );
                    }
                }
            }
        }
        if scenario == ScenarioKind::TaylorError && run.upper >= 1.0 {
            self.issue("run.upper", IssueKind::Band, "sweep must stay below omega_pe");
        }
    }
}
