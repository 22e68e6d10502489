//! Executing a plan and writing its result tree.
//!
//! ```text
//! <dir>/manifest.txt                     plan, build, status of every run
//! <dir>/plan.txt                         the plan as config text
//! <dir>/combined.csv                     every reward's aggregate curve
//! <dir>/finals.csv                       final-window errors of every run
//! <dir>/<reward>/aggregate.csv
//! <dir>/<reward>/seed-<s>/config.txt     resolved config, written before training
//! <dir>/<reward>/seed-<s>/curve.csv      learning curve
//! <dir>/<reward>/seed-<s>/eval.csv       per-step error of the final policy
//! <dir>/<reward>/seed-<s>/checkpoint.bin
//! <dir>/<reward>/seed-<s>/error.txt      only for failed runs
//! ```

use crate::aggregate::{aggregate, Aggregate};
use crate::error::{Error, Result};
use crate::plan::ExperimentPlan;
use crate::provenance::{self, GIT_DESCRIBE};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use suple_core::{Config, RewardKind};
use suple_learn::{eval_curve_csv, learning_curve_csv, train, CurvePoint, FINAL_WINDOW};

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub curve: Vec<CurvePoint<f64>>,
    /// Mean goal error over the final evaluation window.
    pub final_mean: f64,
    /// Largest per-step mean goal error over the final evaluation window.
    pub final_max: f64,
    /// Final-window mean error of each angular coordinate.
    pub final_per_angle: Vec<f64>,
    pub env_steps: usize,
    pub partial: bool,
}

impl RunSummary {
    /// The error stayed below `tol` for the whole final window.
    pub fn holds_below(&self, tol: f64) -> bool {
        self.final_max < tol
    }

    /// Every angle's final-window mean error is below `tol`.
    pub fn angles_below(&self, tol: f64) -> bool {
        self.final_per_angle.iter().all(|&e| e < tol)
    }
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub reward: RewardKind,
    pub seed: u64,
    pub dir: PathBuf,
    /// The failure message for runs that did not finish.
    pub result: std::result::Result<RunSummary, String>,
}

#[derive(Clone, Debug)]
pub struct RewardResult {
    pub reward: RewardKind,
    /// Absent when no run succeeded or the curves could not be aggregated.
    pub aggregate: Option<Aggregate>,
    pub failed: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ComparisonResult {
    pub dir: PathBuf,
    pub runs: Vec<RunRecord>,
    pub rewards: Vec<RewardResult>,
}

impl ComparisonResult {
    pub fn runs_for(&self, reward: RewardKind) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(move |r| r.reward == reward)
    }

    pub fn failed(&self) -> usize {
        self.runs.iter().filter(|r| r.result.is_err()).count()
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

fn run_dir(dir: &Path, reward: RewardKind, seed: u64) -> PathBuf {
    dir.join(reward.as_str()).join(format!("seed-{seed}"))
}

/// Creates `<plan.output>/<plan.name>-<UTC timestamp>` and runs the plan in it.
pub fn run_comparison(
    plan: &ExperimentPlan,
    progress: Option<&(dyn Fn(&RunRecord) + Sync)>,
) -> Result<ComparisonResult> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let mut dir = plan.output.join(format!("{}-{stamp}", plan.name));
    let mut k = 2;
    while dir.exists() {
        dir = plan.output.join(format!("{}-{stamp}-{k}", plan.name));
        k += 1;
    }
    run_comparison_in(plan, &dir, progress)
}

/// Runs every (reward, seed) pair of `plan` into `dir`. A failing run is
/// recorded in the manifest and excluded from aggregation; the other runs
/// continue.
pub fn run_comparison_in(
    plan: &ExperimentPlan,
    dir: &Path,
    progress: Option<&(dyn Fn(&RunRecord) + Sync)>,
) -> Result<ComparisonResult> {
    create_dir(dir)?;
    write(&dir.join("plan.txt"), plan.to_config().to_string())?;
    let seeds = plan.seed_list();
    let mut jobs = Vec::new();
    for &reward in &plan.rewards {
        for &seed in &seeds {
            let rd = run_dir(dir, reward, seed);
            create_dir(&rd)?;
            write(&rd.join("config.txt"), plan.resolved_config(reward, seed)?.to_string())?;
            jobs.push((reward, seed, rd));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs.max(1))
        .build()
        .map_err(|e| Error::plan("plan.jobs", e.to_string()))?;
    let runs: Vec<RunRecord> = pool.install(|| {
        jobs.into_par_iter()
            .map(|(reward, seed, rd)| {
                let result = run_one(plan, reward, seed, &rd).map_err(|e| e.to_string());
                if let Err(msg) = &result {
                    let _ = write(&rd.join("error.txt"), format!("{msg}\n"));
                }
                let record = RunRecord {
                    reward,
                    seed,
                    dir: rd,
                    result,
                };
                if let Some(p) = progress {
                    p(&record);
                }
                record
            })
            .collect()
    });

    let mut rewards = Vec::new();
    for &reward in &plan.rewards {
        let ok: Vec<(u64, Vec<CurvePoint<f64>>)> = runs
            .iter()
            .filter(|r| r.reward == reward)
            .filter_map(|r| r.result.as_ref().ok().map(|s| (r.seed, s.curve.clone())))
            .collect();
        let failed = seeds.len() - ok.len();
        let (aggregate, error) = if ok.is_empty() {
            (None, Some("no successful runs".to_string()))
        } else {
            match aggregate(&ok) {
                Ok(a) => (Some(a), None),
                Err(e) => (None, Some(e.to_string())),
            }
        };
        if let Some(a) = &aggregate {
            let mut cfg = plan.resolved_config(reward, plan.seed_base)?;
            cfg.remove("seed");
            write(
                &dir.join(reward.as_str()).join("aggregate.csv"),
                a.to_csv(reward.as_str(), &cfg),
            )?;
        }
        rewards.push(RewardResult {
            reward,
            aggregate,
            failed,
            error,
        });
    }

    let result = ComparisonResult {
        dir: dir.to_path_buf(),
        runs,
        rewards,
    };
    write(&dir.join("combined.csv"), combined_csv(plan, &result))?;
    write(&dir.join("finals.csv"), finals_csv(plan, &result))?;
    write(&dir.join("manifest.txt"), manifest(plan, &result).to_string())?;
    Ok(result)
}

fn run_one(plan: &ExperimentPlan, reward: RewardKind, seed: u64, rd: &Path) -> Result<RunSummary> {
    let cfg = plan.training(reward, seed)?;
    let out = train(&cfg, Some(rd), None)?;
    let header = provenance::header(&cfg.to_config(), &[seed]);
    let kind = reward.as_str();
    write(
        &rd.join("curve.csv"),
        format!("{header}{}", learning_curve_csv(&out.curve, kind, seed)),
    )?;
    write(
        &rd.join("eval.csv"),
        format!("{header}{}", eval_curve_csv(&out.final_eval, kind, seed)),
    )?;
    Ok(RunSummary {
        curve: out.curve,
        final_mean: out.final_eval.final_mean(FINAL_WINDOW),
        final_max: out.final_eval.final_max(FINAL_WINDOW),
        final_per_angle: out.final_eval.final_per_angle(FINAL_WINDOW),
        env_steps: out.env_steps,
        partial: out.partial,
    })
}

fn combined_csv(plan: &ExperimentPlan, result: &ComparisonResult) -> String {
    let mut out = provenance::header(&plan.to_config(), &plan.seed_list());
    out.push_str("step,mean_error,variance,runs,reward_kind\n");
    for r in &result.rewards {
        if let Some(a) = &r.aggregate {
            a.write_rows(&mut out, r.reward.as_str());
        }
    }
    out
}

fn finals_csv(plan: &ExperimentPlan, result: &ComparisonResult) -> String {
    let n_ang = result
        .runs
        .iter()
        .find_map(|r| r.result.as_ref().ok().map(|s| s.final_per_angle.len()))
        .unwrap_or(0);
    let mut out = provenance::header(&plan.to_config(), &plan.seed_list());
    out.push_str("reward_kind,seed,status,env_steps,final_mean,final_max");
    for i in 1..=n_ang {
        let _ = write!(out, ",final_angle_{i}");
    }
    out.push('\n');
    for r in &result.runs {
        let kind = r.reward.as_str();
        match &r.result {
            Ok(s) => {
                let status = if s.partial { "partial" } else { "ok" };
                let _ = write!(
                    out,
                    "{kind},{},{status},{},{},{}",
                    r.seed, s.env_steps, s.final_mean, s.final_max
                );
                for e in &s.final_per_angle {
                    let _ = write!(out, ",{e}");
                }
            }
            Err(_) => {
                let _ = write!(out, "{kind},{},failed,0,,", r.seed);
                for _ in 0..n_ang {
                    out.push(',');
                }
            }
        }
        out.push('\n');
    }
    out
}

fn manifest(plan: &ExperimentPlan, result: &ComparisonResult) -> Config {
    let mut m = Config::default();
    m.set("plan", &plan.name);
    m.set(
        "created",
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    );
    m.set("git", GIT_DESCRIBE);
    m.set("system", plan.system_name());
    m.set(
        "seeds",
        plan.seed_list()
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    m.set("runs.total", result.runs.len());
    m.set("runs.failed", result.failed());
    for r in &result.runs {
        let status = match &r.result {
            Ok(s) if s.partial => format!("partial final_mean={} final_max={}", s.final_mean, s.final_max),
            Ok(s) => format!("ok final_mean={} final_max={}", s.final_mean, s.final_max),
            Err(e) => format!("failed: {}", e.replace('\n', " ")),
        };
        m.set(&format!("run.{}.{}", r.reward.as_str(), r.seed), status);
    }
    for r in &result.rewards {
        let status = match (&r.aggregate, &r.error) {
            (Some(a), _) => format!("{} runs, {} failed", a.seeds.len(), r.failed),
            (None, Some(e)) => format!("not aggregated ({} failed): {e}", r.failed),
            (None, None) => "not aggregated".to_string(),
        };
        m.set(&format!("aggregate.{}", r.reward.as_str()), status);
    }
    m
}
