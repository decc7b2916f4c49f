//! The JSON document behind `--config`. Every section has a default so an
//! empty object (or no file at all) runs the desk-scale world.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use epiecon::calibrate::{Executor, PriorBox, Thresholds};
use epiecon::coupling::ScenarioConfig;
use epiecon::error::read_json;
use epiecon::shocks::{date, ClosureSet, Timeline};
use epiecon::world::{desk_config, DeskScale, WorldConfig};
use epiecon::{Error, Result};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub world: WorldSpec,
    pub scenario: ScenarioConfig,
    pub sweep: GridSpec,
    pub calibration: Option<CalibrationSpec>,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg: CliConfig = match path {
            Some(p) => read_json(p)?,
            None => CliConfig::default(),
        };
        // world files are resolved relative to the config that names them
        if let (Some(p), WorldSpec::File(f)) = (path, &mut cfg.world) {
            if f.is_relative() {
                if let Some(dir) = p.parent() {
                    *f = dir.join(&*f);
                }
            }
        }
        Ok(cfg)
    }
}

/// Where the world configuration comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorldSpec {
    /// The built-in desk-scale synthetic world.
    Desk(DeskScale),
    /// A full world configuration inline.
    Config(Box<WorldConfig>),
    /// A JSON file holding a full world configuration.
    File(PathBuf),
}

impl Default for WorldSpec {
    fn default() -> Self {
        WorldSpec::Desk(DeskScale::default())
    }
}

impl WorldSpec {
    /// The world configuration, with the world seed replaced when given.
    pub fn resolve(&self, seed: Option<u64>) -> Result<WorldConfig> {
        let mut cfg = match self {
            WorldSpec::Desk(scale) => desk_config(*scale),
            WorldSpec::Config(c) => (**c).clone(),
            WorldSpec::File(p) => read_json(p)?,
        };
        if let Some(s) = seed {
            cfg.world_seed = s;
        }
        Ok(cfg)
    }
}

/// Scenario grid of a sweep: closure set × fear multiplier × measures start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub closure_sets: Vec<ClosureSet>,
    pub fear_multipliers: Vec<f64>,
    pub measures_starts: Vec<NaiveDate>,
    /// Runs per cell, with seeds base, base + 1, ...
    pub n_seeds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        let d = |(y, m, dd): (i32, u32, u32)| date(y, m, dd);
        Self {
            closure_sets: ClosureSet::GRID.to_vec(),
            fear_multipliers: vec![0.1, 1.0, 10.0],
            measures_starts: vec![d(Timeline::EARLY), d(Timeline::BASELINE), d(Timeline::LATE)],
            n_seeds: 10,
        }
    }
}

/// One grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub closure_set: ClosureSet,
    pub fear_multiplier: f64,
    pub measures_start: NaiveDate,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.closure_sets.is_empty() || self.fear_multipliers.is_empty() || self.measures_starts.is_empty() {
            return Err(Error::config("sweep", "every grid axis needs at least one value"));
        }
        if self.n_seeds == 0 {
            return Err(Error::config("sweep.n_seeds", "must be positive"));
        }
        Ok(())
    }

    /// Cells in closure, fear, start order with repeated cells dropped.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out: Vec<Cell> = Vec::new();
        for &closure_set in &self.closure_sets {
            for &fear_multiplier in &self.fear_multipliers {
                for &measures_start in &self.measures_starts {
                    let c = Cell { closure_set, fear_multiplier, measures_start };
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }
}

/// What the calibration is fitted against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    /// Mean summary of reference runs at the world's own parameters.
    GroundTruth { n_reference: usize },
    /// Observed weekly deaths per 1000 with the published economic drops.
    Observed { weekly_deaths: Vec<f64> },
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec::GroundTruth { n_reference: 20 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    pub prior: PriorBox,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "parallel")]
    pub executor: Executor,
    #[serde(default)]
    pub target: TargetSpec,
    /// Posterior draws written next to the accepted set.
    #[serde(default)]
    pub posterior_draws: usize,
}

fn default_samples() -> usize {
    1000
}

fn parallel() -> Executor {
    Executor::Parallel
}
