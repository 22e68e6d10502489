//! Comparison plans: one training template, several rewards, several seeds.
//!
//! A plan file uses the ordinary `key=value` config format. Keys under
//! `plan.` describe the comparison itself; every other key is the training
//! template shared by all runs.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `plan.name` | file stem or `comparison` | prefix of the output directory |
//! | `plan.rewards` | `suple,maxle,quadratic,sparse` | reward kinds to compare |
//! | `plan.seeds` | `5` | runs per reward |
//! | `plan.seed_base` | `0` | first seed; run `k` uses `seed_base + k` |
//! | `plan.output` | `results` | directory the timestamped run directory is created in |
//! | `plan.jobs` | `1` | runs trained concurrently |
//! | `plan.extended` | `false` | marks plans that take hours |

use crate::error::{Error, Result};
use std::path::{Path, PathBuf};
use suple_core::{Config, ResetMode, RewardKind};
use suple_learn::Training;

const PLAN_KEYS: &[&str] = &["name", "rewards", "seeds", "seed_base", "output", "jobs", "extended"];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub name: String,
    pub rewards: Vec<RewardKind>,
    pub seeds: usize,
    pub seed_base: u64,
    /// Training settings shared by every run, without `plan.*` keys.
    pub template: Config,
    pub output: PathBuf,
    pub jobs: usize,
    pub extended: bool,
}

impl ExperimentPlan {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let mut template = Config::default();
        for (k, v) in cfg.iter() {
            match k.strip_prefix("plan.") {
                Some(rest) if !PLAN_KEYS.contains(&rest) => return Err(Error::plan(k, "unknown key")),
                Some(_) => {}
                None => template.set(k, v),
            }
        }
        template.set_default("system", "pendulum");
        let rewards = match cfg.get("plan.rewards") {
            None => RewardKind::ALL.to_vec(),
            Some(list) => list
                .split(',')
                .map(|r| r.trim().parse::<RewardKind>())
                .collect::<suple_core::Result<Vec<_>>>()?,
        };
        if rewards.is_empty() {
            return Err(Error::plan("plan.rewards", "no rewards"));
        }
        let mut seen = rewards.clone();
        seen.sort_by_key(|r| r.as_str());
        seen.dedup();
        if seen.len() != rewards.len() {
            return Err(Error::plan("plan.rewards", "duplicate reward"));
        }
        let plan = Self {
            name: cfg.get("plan.name").unwrap_or("comparison").to_string(),
            rewards,
            seeds: cfg.parse_or("plan.seeds", 5)?,
            seed_base: cfg.parse_or("plan.seed_base", 0)?,
            output: PathBuf::from(cfg.get("plan.output").unwrap_or("results")),
            jobs: cfg.parse_or("plan.jobs", 1)?,
            extended: cfg.parse_or("plan.extended", false)?,
            template,
        };
        if plan.seeds == 0 {
            return Err(Error::plan("plan.seeds", "must be at least 1"));
        }
        if plan.name.is_empty() || plan.name.contains(['/', '\\']) {
            return Err(Error::plan("plan.name", "must be a plain, non-empty name"));
        }
        for &r in &plan.rewards {
            plan.training(r, plan.seed_base)?;
        }
        Ok(plan)
    }

    /// Loads a plan file; `plan.name` defaults to the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Config::load(path)?;
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            cfg.set_default("plan.name", stem);
        }
        Self::from_config(&cfg)
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|k| self.seed_base + k).collect()
    }

    pub fn system_name(&self) -> &str {
        self.template.get("system").unwrap_or("pendulum")
    }

    pub fn reset_mode(&self) -> Result<ResetMode> {
        Ok(self.template.get("train.reset_mode").unwrap_or("fixed_start").parse()?)
    }

    /// Training settings of the run for `reward` and `seed`.
    pub fn training(&self, reward: RewardKind, seed: u64) -> Result<Training> {
        let mut cfg = self.template.clone();
        cfg.set("reward.kind", reward.as_str());
        cfg.set("seed", seed);
        Ok(Training::from_config(&cfg)?)
    }

    /// Every setting of one run, defaults included.
    pub fn resolved_config(&self, reward: RewardKind, seed: u64) -> Result<Config> {
        Ok(self.training(reward, seed)?.to_config())
    }

    /// The plan itself as config text, `plan.*` keys included.
    pub fn to_config(&self) -> Config {
        let mut cfg = self.template.clone();
        cfg.set("plan.name", &self.name);
        cfg.set(
            "plan.rewards",
            self.rewards.iter().map(|r| r.as_str()).collect::<Vec<_>>().join(","),
        );
        cfg.set("plan.seeds", self.seeds);
        cfg.set("plan.seed_base", self.seed_base);
        cfg.set("plan.output", self.output.display());
        cfg.set("plan.jobs", self.jobs);
        cfg.set("plan.extended", self.extended);
        cfg
    }
}
