use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use tate_diffusion::kernel::Mode;
use tate_diffusion::local_field::{LocalField, DEFAULT_PRECISION};
use tate_diffusion::tate_model::{CurveConfig, DEFAULT_ORDER};

use crate::{usage, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Everything a command needs. Loaded from an optional JSON file, then
/// overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub p: u32,
    pub f: u32,
    pub vq: i64,
    /// Truncation order `N` of the q-series.
    pub order: usize,
    pub mode: Mode,
    pub epsilon: f64,
    pub t_list: Vec<f64>,
    /// Step-function resolution `m`; `vq + 1` when absent.
    pub resolution: Option<i64>,
    pub seed: u64,
    pub paths: u64,
    pub t_max: f64,
    /// Digits kept per simulated state.
    pub precision: i64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 5,
            f: 1,
            vq: 3,
            order: DEFAULT_ORDER,
            mode: Mode::Oracle,
            epsilon: 1.0,
            t_list: vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0],
            resolution: None,
            seed: 0,
            paths: 1,
            t_max: 10.0,
            precision: DEFAULT_PRECISION as i64,
            out: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn from_args(args: &CommonArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        args.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolution(&self) -> i64 {
        self.resolution.unwrap_or(self.vq + 1)
    }

    /// Checks every precondition that does not depend on the command and
    /// builds the curve.
    pub fn validate(&self) -> Result<CurveConfig, CliError> {
        let field = LocalField::from_pf(self.p, self.f).map_err(usage)?;
        let curve = CurveConfig::new(field, self.vq, self.order).map_err(usage)?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(usage(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if let Some(t) = self.t_list.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(usage(format!("times must be finite and nonnegative, got {t}")));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(usage(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.paths == 0 {
            return Err(usage("at least one path is required"));
        }
        if self.precision <= self.vq {
            return Err(usage(format!("precision {} must exceed v(q) = {}", self.precision, self.vq)));
        }
        if self.resolution() < self.vq {
            return Err(usage(format!("resolution {} is below v(q) = {}", self.resolution(), self.vq)));
        }
        Ok(curve)
    }
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

/// Flags shared by every command. Each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON file with any subset of the configuration fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub f: Option<u32>,
    #[arg(long)]
    pub vq: Option<i64>,
    /// q-series truncation order
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Digits kept per simulated state
    #[arg(long)]
    pub precision: Option<i64>,
    /// Step-function resolution for heat runs
    #[arg(long)]
    pub resolution: Option<i64>,
    /// Comma-separated output times
    #[arg(long = "t", value_delimiter = ',')]
    pub t_list: Option<Vec<f64>>,
    #[arg(long)]
    pub paths: Option<u64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl CommonArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        take!(p, f, vq, order, mode, epsilon, seed, precision, t_list, paths, t_max, format);
        if self.resolution.is_some() {
            cfg.resolution = self.resolution;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
    }
}

/// Initial data for `heat`: one value per circle, or a full step function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialCondition {
    Radial(Vec<f64>),
    Step(StepFile),
}

/// Ball values circle by circle, in the digit order of `StepFunction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepFile {
    pub resolution: i64,
    pub circles: Vec<Vec<f64>>,
}

impl InitialCondition {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    /// The indicator of circle 0.
    pub fn default_for(vq: i64) -> Self {
        let mut v = vec![0.0; vq as usize];
        v[0] = 1.0;
        InitialCondition::Radial(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let mut cfg: RunConfig = serde_json::from_str(r#"{"p": 7, "vq": 5, "seed": 3}"#).unwrap();
        let args = CommonArgs { vq: Some(4), mode: Some(Mode::Paper), ..Default::default() };
        args.apply(&mut cfg);
        assert_eq!((cfg.p, cfg.vq, cfg.seed, cfg.mode), (7, 4, 3, Mode::Paper));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"pp": 5}"#).is_err());
        let bad = RunConfig { p: 6, ..Default::default() };
        assert_eq!(bad.validate().unwrap_err().exit_code(), 1);
        let bad = RunConfig { epsilon: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = RunConfig { t_list: vec![1.0, f64::NAN], ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn initial_condition_shapes() {
        let r: InitialCondition = serde_json::from_str("[1, 0, 0]").unwrap();
        assert_eq!(r, InitialCondition::Radial(vec![1.0, 0.0, 0.0]));
        let s: InitialCondition = serde_json::from_str(r#"{"resolution": 4, "circles": [[1.0]]}"#).unwrap();
        assert!(matches!(s, InitialCondition::Step(_)));
    }
}
