//! Run configuration: a TOML file of key = value sections, every field
//! overridable from the command line. Unknown keys are rejected so typos
//! fail loudly instead of silently running defaults.

use crate::blocks::Variant;
use crate::error::{Error, Result};
use crate::experiments::NormSpec;
use serde::{Deserialize, Serialize};

fn default_level() -> u32 {
    12
}
fn default_alpha() -> f64 {
    0.3
}
fn default_variant() -> String {
    "sum".into()
}
fn default_blocks() -> usize {
    8
}
fn default_eta() -> f64 {
    0.1
}
fn default_tail_replicates() -> u64 {
    48
}
fn default_seed() -> u64 {
    42
}
fn default_replicates() -> u64 {
    10_000
}
fn default_workers() -> usize {
    1
}
fn default_kind() -> String {
    "schauder-bm".into()
}
fn default_norm() -> String {
    "sup".into()
}
fn default_radius() -> f64 {
    1.0
}
fn default_rho_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.25]
}
fn default_k_lo() -> usize {
    3
}
fn default_k_hi() -> usize {
    8
}
fn default_lambda() -> f64 {
    0.9
}
fn default_dim() -> usize {
    2
}
fn default_sub_dim() -> usize {
    1
}
fn default_half_sides() -> Vec<f64> {
    vec![1.0, 1.0]
}
fn default_theta() -> f64 {
    0.5
}
fn default_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kind: String,
    pub level: u32,
    /// JSON basis file, required for kind = "custom".
    pub custom_path: Option<String>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            level: default_level(),
            custom_path: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub alpha: f64,
    pub variant: String,
    pub eta: f64,
    pub blocks: usize,
    pub tail_replicates: u64,
    /// 0 means 2^level + blocks.
    pub j_max: usize,
    /// Fixed dyadic cuts n_k = 2^k instead of the certified greedy search.
    pub dyadic: bool,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            variant: default_variant(),
            eta: default_eta(),
            blocks: default_blocks(),
            tail_replicates: default_tail_replicates(),
            j_max: 0,
            dyadic: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub replicates: u64,
    pub workers: usize,
    /// Empty means $MIDSPACE_OUT, falling back to the current directory.
    pub out_dir: String,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            replicates: default_replicates(),
            workers: default_workers(),
            out_dir: String::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Truncation for sampling; 0 means the model's dimension at this level.
    pub trunc: usize,
    pub norm: String,
    pub rho_grid: Vec<f64>,
    /// Empty grids fall back to experiment-specific defaults.
    pub eps_grid: Vec<f64>,
    pub radius: f64,
    /// Slope bound for tightness; 0 means estimate it via fernique first.
    pub rho_hat: f64,
    pub k_lo: usize,
    pub k_hi: usize,
    pub lambda: f64,
    pub dim: usize,
    pub sub_dim: usize,
    pub body: String,
    pub half_sides: Vec<f64>,
    pub semi_axes: Vec<f64>,
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub theta: f64,
    pub tol: f64,
    pub t_points: usize,
    pub t_min_exp: f64,
    pub t_max_exp: f64,
    /// Input coefficients (CSV n,xi) for norms/ciesielski.
    pub coeffs_path: String,
    /// Input path (CSV t,x) for norms/kfunctional.
    pub path_csv: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trunc: 0,
            norm: default_norm(),
            rho_grid: default_rho_grid(),
            eps_grid: Vec::new(),
            radius: default_radius(),
            rho_hat: 0.0,
            k_lo: default_k_lo(),
            k_hi: default_k_hi(),
            lambda: default_lambda(),
            dim: default_dim(),
            sub_dim: default_sub_dim(),
            body: "box".into(),
            half_sides: default_half_sides(),
            semi_axes: Vec::new(),
            normals: Vec::new(),
            offsets: Vec::new(),
            theta: default_theta(),
            tol: default_tol(),
            t_points: 40,
            t_min_exp: -20.0,
            t_max_exp: 20.0,
            coeffs_path: String::new(),
            path_csv: String::new(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub schedule: ScheduleConfig,
    pub run: RunSection,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &str) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Applies one `section.key = value` override (values in TOML syntax).
    pub fn apply_override(text: &mut toml::Table, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {spec:?} is not key=value")))?;
        let (section, field) = key
            .trim()
            .split_once('.')
            .ok_or_else(|| Error::Config(format!("override key {key:?} is not section.key")))?;
        let parsed: toml::Value = format!("v = {}", value.trim())
            .parse::<toml::Table>()
            .map_err(|e| Error::Config(format!("override value {value:?}: {e}")))?
            .remove("v")
            .expect("just inserted");
        text.entry(section)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{section} is not a table")))?
            .insert(field.trim().to_string(), parsed);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.schedule.alpha;
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::AlphaOutOfRange(a));
        }
        let variant = Variant::parse(&self.schedule.variant)?;
        if variant == Variant::Sup && self.schedule.eta <= 0.0 {
            return Err(Error::EtaOutOfRange(self.schedule.eta));
        }
        if self.schedule.blocks < 1 {
            return Err(Error::Config("schedule.blocks must be >= 1".into()));
        }
        if self.model.level < 1 || self.model.level > 24 {
            return Err(Error::Config("model.level must lie in 1..=24".into()));
        }
        if self.run.replicates < 1 {
            return Err(Error::Config("run.replicates must be >= 1".into()));
        }
        if self.model.kind == "custom" && self.model.custom_path.is_none() {
            return Err(Error::Config("custom model needs model.custom_path".into()));
        }
        NormSpec::parse(&self.experiment.norm)?;
        if !(self.experiment.theta > 0.0 && self.experiment.theta < 1.0) {
            return Err(Error::Config("experiment.theta must lie in (0, 1)".into()));
        }
        if self.experiment.tol <= 0.0 {
            return Err(Error::Config("experiment.tol must be positive".into()));
        }
        Ok(())
    }

    pub fn variant(&self) -> Variant {
        Variant::parse(&self.schedule.variant).expect("validated")
    }

    pub fn j_max(&self) -> usize {
        if self.schedule.j_max > 0 {
            self.schedule.j_max
        } else {
            (1usize << self.model.level) + self.schedule.blocks
        }
    }

    pub fn out_dir(&self) -> String {
        if !self.run.out_dir.is_empty() {
            self.run.out_dir.clone()
        } else {
            std::env::var("MIDSPACE_OUT").unwrap_or_else(|_| ".".into())
        }
    }
}
