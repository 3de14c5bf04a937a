//! Run configuration: a JSON document layered over per-command defaults,
//! with `--a.b-c value` flags overriding individual fields.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use tavis_core::numerics::{linspace, logspace};
use tavis_core::SystemParams;

use crate::error::{CliError, Result};
use crate::Command;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Cs,
    Svs,
    Dsvs,
    Oat,
    DstsGeneral,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::Cs => "cs",
            Scenario::Svs => "svs",
            Scenario::Dsvs => "dsvs",
            Scenario::Oat => "oat",
            Scenario::DstsGeneral => "dsts-general",
        };
        f.write_str(s)
    }
}

/// Variables a point can carry. The first seven may span grid axes; the
/// rest can only be held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Var {
    NBar,
    AlphaSq,
    Sinh2r,
    Tau,
    Chi,
    Theta,
    T,
    NTh,
    Phi,
    Varphi,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::NBar => "n_bar",
            Var::AlphaSq => "alpha_sq",
            Var::Sinh2r => "sinh2r",
            Var::Tau => "tau",
            Var::Chi => "chi",
            Var::Theta => "theta",
            Var::T => "t",
            Var::NTh => "n_th",
            Var::Phi => "phi",
            Var::Varphi => "varphi",
        }
    }

    pub fn is_grid_var(self) -> bool {
        !matches!(self, Var::NTh | Var::Phi | Var::Varphi)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, spacing: Spacing::Linear }
    }

    pub fn log(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, spacing: Spacing::Log }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => linspace(self.min, self.max, self.points),
            Spacing::Log => logspace(self.min, self.max, self.points).unwrap_or_default(),
        }
    }

    fn check(&self, var: Var) -> Result<()> {
        let name = var.name();
        if self.points < 2 {
            return Err(CliError::Config(format!("grid.{name}: points must be at least 2, got {}", self.points)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(CliError::Config(format!("grid.{name}: need finite min < max, got [{}, {}]", self.min, self.max)));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(CliError::Config(format!("grid.{name}: log spacing needs min > 0, got {}", self.min)));
        }
        Ok(())
    }
}

/// System parameters as entered: frequencies `ν = ω/2π` in Hz, time in s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsHz {
    pub omega0_hz: f64,
    pub omega_a_hz: f64,
    pub g_hz: f64,
    pub h_hz: f64,
    pub t_s: f64,
}

impl ParamsHz {
    pub fn fig2(t_s: f64) -> Self {
        Self { omega0_hz: 6.9e9, omega_a_hz: 6.89e9, g_hz: 1.05e6, h_hz: 1e-4, t_s }
    }

    /// Converts to angular units; the only place `2π` enters.
    pub fn to_system(&self) -> Result<SystemParams> {
        let p = SystemParams::from_hz(self.omega0_hz, self.omega_a_hz, self.g_hz, self.h_hz, self.t_s)
            .map_err(CliError::core("params"))?;
        p.checked_delta().map_err(CliError::core("params"))?;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Sampling ranges and sizes of the `validate` oracle suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    pub random_specs: usize,
    pub alpha_sq_max: f64,
    pub r_max: f64,
    pub n_th_max: f64,
    pub max_atoms: usize,
    pub max_cutoff: usize,
    pub detuning_ratios: Vec<f64>,
    pub fidelity_cutoff: usize,
    pub fidelity_steps: usize,
    pub fidelity_periods: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            random_specs: 24,
            alpha_sq_max: 4.0,
            r_max: 1.0,
            n_th_max: 0.5,
            max_atoms: 6,
            max_cutoff: 256,
            detuning_ratios: vec![5.0, 10.0, 20.0, 40.0],
            fidelity_cutoff: 64,
            fidelity_steps: 50,
            fidelity_periods: 50.0,
        }
    }
}

/// Desk-scale ceilings for `validate`.
pub const VALIDATE_MAX_ATOMS: usize = 6;
pub const VALIDATE_MAX_CUTOFF: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub scenario: Scenario,
    pub params: ParamsHz,
    pub n_atoms: usize,
    #[serde(default)]
    pub grid: BTreeMap<Var, Axis>,
    #[serde(default)]
    pub fixed: BTreeMap<Var, f64>,
    /// Photon numbers of the fig3 minimum curves.
    #[serde(default)]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub validation: ValidationConfig,
}

impl ScanConfig {
    pub fn system(&self) -> Result<SystemParams> {
        self.params.to_system()
    }

    pub fn check(&self) -> Result<()> {
        self.system()?;
        if self.n_atoms == 0 {
            return Err(CliError::Config("n_atoms must be at least 1".into()));
        }
        for (&var, axis) in &self.grid {
            if !var.is_grid_var() {
                return Err(CliError::Config(format!(
                    "grid axis `{}` is not a grid variable (use one of n_bar, alpha_sq, sinh2r, tau, chi, theta, t)",
                    var.name()
                )));
            }
            axis.check(var)?;
            if self.fixed.contains_key(&var) {
                return Err(CliError::Config(format!("`{}` is both a grid axis and a fixed value", var.name())));
            }
        }
        for (var, v) in &self.fixed {
            if !v.is_finite() {
                return Err(CliError::Config(format!("fixed.{} must be finite, got {v}", var.name())));
            }
        }
        if let Some(bad) = self.levels.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(CliError::Config(format!("levels must be positive and finite, got {bad}")));
        }
        Ok(())
    }

    /// Grid points in row order, the first axis varying slowest.
    pub fn points(&self) -> Vec<Point> {
        let mut out = vec![Point::default()];
        for (&var, axis) in &self.grid {
            let values = axis.values();
            out = out
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.values.push((var, v));
                        q
                    })
                })
                .collect();
        }
        out
    }

    pub fn grid_vars(&self) -> Vec<Var> {
        self.grid.keys().copied().collect()
    }

    pub fn fixed_or(&self, var: Var, default: f64) -> f64 {
        self.fixed.get(&var).copied().unwrap_or(default)
    }
}

/// Values of the grid variables at one point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    pub values: Vec<(Var, f64)>,
}

impl Point {
    pub fn get(&self, var: Var) -> Option<f64> {
        self.values.iter().find(|(v, _)| *v == var).map(|&(_, x)| x)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.values.is_empty() {
            return f.write_str("the single point");
        }
        let parts: Vec<String> = self.values.iter().map(|(v, x)| format!("{}={x}", v.name())).collect();
        f.write_str(&parts.join(", "))
    }
}

/// Flags from the command line that land in the config.
#[derive(Clone, Debug, Default)]
pub struct Globals {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

/// A `--a.b-c value` override, path already split and snake_cased.
#[derive(Clone, Debug, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: Value,
}

impl Override {
    pub fn parse(flag: &str, raw: &str) -> Result<Self> {
        let path: Vec<String> = flag.split('.').map(|s| s.replace('-', "_")).collect();
        if path.iter().any(String::is_empty) {
            return Err(CliError::Config(format!("malformed override --{flag}")));
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        Ok(Self { path, value })
    }
}

fn set_path(root: &mut Value, path: &[String], value: Value) -> Result<()> {
    let mut node = root;
    for key in &path[..path.len() - 1] {
        if !node.is_object() {
            return Err(CliError::Config(format!("override path `{}` crosses a non-object", path.join("."))));
        }
        node = node.as_object_mut().expect("checked above").entry(key.clone()).or_insert_with(|| Value::Object(Map::new()));
    }
    match node.as_object_mut() {
        Some(obj) => {
            obj.insert(path[path.len() - 1].clone(), value);
            Ok(())
        }
        None => Err(CliError::Config(format!("override path `{}` crosses a non-object", path.join(".")))),
    }
}

/// Recursive object merge; `top` wins on scalars and arrays.
pub fn deep_merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => deep_merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Reads a config file. A metadata sidecar written by an earlier run is
/// accepted too; its embedded `config` is used.
pub fn load_file(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Input { path: path.to_path_buf(), source })?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{} is not valid JSON: {e}", path.display())))?;
    if !value.is_object() {
        return Err(CliError::Config(format!("{} must hold a JSON object", path.display())));
    }
    match (value.get("command"), value.get("config")) {
        (Some(_), Some(inner)) => Ok(inner.clone()),
        _ => Ok(value),
    }
}

fn params_json(p: &ParamsHz) -> Value {
    serde_json::to_value(p).expect("plain struct")
}

/// Defaults of a command. Figure grids expressed in `2g²n̄/Δ²` follow the
/// user's parameters, so those are read from the user layer first.
pub fn defaults(command: Command, user: &Value) -> Value {
    let t_default = match command {
        Command::Fig2 | Command::Fig3 | Command::Fig4a | Command::Fig4b => 1e-9,
        _ => 1e-6,
    };
    let base_params = ParamsHz::fig2(t_default);
    let mut base = json!({
        "scenario": "cs",
        "params": params_json(&base_params),
        "n_atoms": 4,
        "seed": 0,
    });
    match command {
        Command::Fig2 => {
            let mut params = params_json(&base_params);
            if let Some(p) = user.get("params") {
                deep_merge(&mut params, p.clone());
            }
            let c = serde_json::from_value::<ParamsHz>(params)
                .ok()
                .and_then(|p| p.to_system().ok())
                .and_then(|p| p.dispersive_ratio().ok())
                // invalid parameters are reported by the later check
                .unwrap_or(1.0);
            deep_merge(
                &mut base,
                json!({
                    "grid": { "n_bar": Axis::log(0.1 / c, 1e4 / c, 60) },
                    "fixed": { "theta": PI / 2.0, "phi": 0.0 },
                }),
            );
        }
        Command::Fig3 => deep_merge(
            &mut base,
            json!({
                "scenario": "dsvs",
                "grid": { "alpha_sq": Axis::linear(1.0, 1000.0, 101), "sinh2r": Axis::linear(0.0, 1000.0, 101) },
                "fixed": { "tau": 1.0 },
                "levels": [200.0, 400.0, 600.0, 800.0, 1000.0],
            }),
        ),
        Command::Fig4a => deep_merge(
            &mut base,
            json!({
                "scenario": "dsvs",
                "grid": { "sinh2r": Axis::log(1e-4, 1e3, 200), "tau": Axis::linear(-1.0, 1.0, 81) },
                "fixed": { "n_bar": 1000.0 },
            }),
        ),
        Command::Fig4b => deep_merge(
            &mut base,
            json!({
                "scenario": "dsvs",
                "grid": { "sinh2r": Axis::log(1e-2, 1e3, 200) },
                "fixed": { "n_bar": 1000.0 },
            }),
        ),
        Command::Validate => deep_merge(&mut base, json!({ "validation": ValidationConfig::default() })),
        Command::Qfi | Command::Precision | Command::Scan => {}
    }
    base
}

/// Layers, lowest first: command defaults, config file, dotted overrides,
/// global flags.
pub fn resolve(command: Command, globals: &Globals, overrides: &[Override]) -> Result<ScanConfig> {
    let mut user = match &globals.config {
        Some(path) => load_file(path)?,
        None => Value::Object(Map::new()),
    };
    for o in overrides {
        set_path(&mut user, &o.path, o.value.clone())?;
    }
    if let Some(seed) = globals.seed {
        set_path(&mut user, &["seed".into()], json!(seed))?;
    }
    if let Some(out) = &globals.out {
        set_path(&mut user, &["output".into(), "path".into()], json!(out))?;
    }
    if let Some(format) = globals.format {
        set_path(&mut user, &["output".into(), "format".into()], serde_json::to_value(format).expect("unit enum"))?;
    }
    let mut merged = defaults(command, &user);
    deep_merge(&mut merged, user);
    let config: ScanConfig = serde_json::from_value(merged).map_err(|e| CliError::Config(e.to_string()))?;
    config.check()?;
    Ok(config)
}
