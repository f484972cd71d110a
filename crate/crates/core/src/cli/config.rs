//! Layered experiment configuration: built-in defaults, then a config file
//! (flat `key = value` TOML, or a previous run's `manifest.json`), then the
//! `PACLAB_SEED` environment variable for the seed only, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use super::output::{RunManifest, RunSpec};
use super::CliError;
use crate::empirics::{ExperimentConfig, GtMode, Task};

pub const SEED_ENV: &str = "PACLAB_SEED";
pub const DEFAULT_OUT_DIR: &str = "paclab-out";
pub const DEFAULT_CONJUNCTION_VARS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskName {
    Conjunction,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GtModeName {
    PerTrial,
    Fixed,
}

impl From<GtModeName> for GtMode {
    fn from(value: GtModeName) -> Self {
        match value {
            GtModeName::PerTrial => GtMode::PerTrial,
            GtModeName::Fixed => GtMode::Fixed,
        }
    }
}

/// One layer of settings; unset keys fall through to the layer below.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSettings {
    #[arg(long, value_enum)]
    pub task: Option<TaskName>,
    /// Boolean variables of the conjunction task.
    #[arg(long)]
    pub n: Option<usize>,
    /// VC dimension of the threshold task's theoretical bound.
    #[arg(long = "vc-dim")]
    pub vc_dim: Option<u32>,
    #[arg(long)]
    pub slots: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "m-start")]
    pub m_start: Option<u64>,
    #[arg(long = "m-step")]
    pub m_step: Option<u64>,
    #[arg(long = "m-max")]
    pub m_max: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "gt-mode", value_enum)]
    pub gt_mode: Option<GtModeName>,
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSettings {
    /// `other` wins wherever it has a value.
    pub fn overlay(self, other: Self) -> Self {
        Self {
            task: other.task.or(self.task),
            n: other.n.or(self.n),
            vc_dim: other.vc_dim.or(self.vc_dim),
            slots: other.slots.or(self.slots),
            trials: other.trials.or(self.trials),
            m_start: other.m_start.or(self.m_start),
            m_step: other.m_step.or(self.m_step),
            m_max: other.m_max.or(self.m_max),
            seed: other.seed.or(self.seed),
            gt_mode: other.gt_mode.or(self.gt_mode),
            out_dir: other.out_dir.or(self.out_dir),
        }
    }

    pub fn from_config(config: &ExperimentConfig) -> Self {
        let (task, n) = match config.task {
            Task::Conjunction { n } => (TaskName::Conjunction, Some(n)),
            Task::Threshold => (TaskName::Threshold, None),
        };
        Self {
            task: Some(task),
            n,
            vc_dim: Some(config.vc_dim),
            slots: Some(config.num_slots),
            trials: Some(config.trials),
            m_start: Some(config.schedule.start),
            m_step: Some(config.schedule.step),
            m_max: Some(config.schedule.max),
            seed: Some(config.master_seed),
            gt_mode: Some(match config.gt_mode {
                GtMode::PerTrial => GtModeName::PerTrial,
                GtMode::Fixed => GtModeName::Fixed,
            }),
            out_dir: None,
        }
    }

    /// Parses either a flat TOML settings file or a run manifest.
    pub fn parse_file_text(text: &str) -> Result<Self, CliError> {
        if text.trim_start().starts_with('{') {
            match RunManifest::from_json(text)?.run {
                RunSpec::Experiment(config) => Ok(Self::from_config(&config)),
                RunSpec::Bound(_) => Err(CliError::Config(
                    "manifest describes a bound run, not an experiment".into(),
                )),
            }
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse_file_text(&text)
    }

    /// Resolves against the defaults of the selected task.
    pub fn resolve(&self) -> Result<(ExperimentConfig, PathBuf), CliError> {
        let task = match self.task.unwrap_or(TaskName::Conjunction) {
            TaskName::Conjunction => Task::Conjunction {
                n: self.n.unwrap_or(DEFAULT_CONJUNCTION_VARS),
            },
            TaskName::Threshold => Task::Threshold,
        };
        let mut config = ExperimentConfig::defaults_for(task);
        if let Some(d) = self.vc_dim {
            config.vc_dim = d;
        }
        if let Some(l) = self.slots {
            config.num_slots = l;
        }
        if let Some(k) = self.trials {
            config.trials = k;
        }
        if let Some(s) = self.m_start {
            config.schedule.start = s;
        }
        if let Some(s) = self.m_step {
            config.schedule.step = s;
        }
        if let Some(s) = self.m_max {
            config.schedule.max = s;
        }
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(mode) = self.gt_mode {
            config.gt_mode = mode.into();
        }
        config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let out_dir = self.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        Ok((config, out_dir))
    }
}

/// Seed layer taken from the environment.
pub fn env_seed_layer(value: Option<String>) -> Result<ExperimentSettings, CliError> {
    let seed = value
        .map(|v| {
            v.trim()
                .parse::<u64>()
                .map_err(|e| CliError::Config(format!("{SEED_ENV}={v:?}: {e}")))
        })
        .transpose()?;
    Ok(ExperimentSettings { seed, ..Default::default() })
}

/// Defaults < file < environment seed (only if the file set none) < flags.
pub fn resolve_layers(
    file: Option<ExperimentSettings>,
    env_seed: Option<String>,
    flags: ExperimentSettings,
) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let env = env_seed_layer(env_seed)?;
    let settings = env.overlay(file.unwrap_or_default()).overlay(flags);
    settings.resolve()
}
