//! Training configuration and the collect/label/update loop.
//!
//! Each iteration collects one episode with the current policy (uniform
//! random actions until `warmup_steps` environment steps have been taken),
//! labels it with the configured reward, appends it to the replay buffer
//! and then performs one gradient update per new transition. Evaluation
//! and checkpointing happen at episode boundaries once `eval_every` more
//! environment steps have accumulated.

use crate::checkpoint::{config_hash, save_checkpoint};
use crate::error::{Error, Result};
use crate::features::{observation_dim, observe, observe_into};
use crate::replay::ReplayBuffer;
use crate::rollout::{collect_rollout, evaluate, EvalCurve};
use crate::sac::{Sac, SacSettings, UpdateStats};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};
use suple_core::rewards::parse_list;
use suple_core::{
    make_system, Config, ResetMode, RewardSpec, Scalar, StateVector, SystemKind, SystemModel, TrajectoryMeta,
};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig<F> {
    pub system: SystemModel<F>,
    pub reward: RewardSpec<F>,
    pub sac: SacSettings<F>,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Episode length `H`.
    pub horizon: usize,
    pub total_steps: usize,
    pub warmup_steps: usize,
    pub seed: u64,
    pub reset_mode: ResetMode,
    /// Replaces the rest state as the fixed start.
    pub start_state: Option<StateVector<F>>,
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub eval_horizon: usize,
    pub time_budget: Option<Duration>,
}

/// Episode length used when none is configured.
pub fn default_episode_horizon(kind: SystemKind) -> usize {
    match kind {
        SystemKind::DoublePendulum => 1000,
        _ => 500,
    }
}

const TRAIN_KEYS: &[&str] = &[
    "alpha",
    "auto_alpha",
    "batch_size",
    "eval_episodes",
    "eval_every",
    "eval_horizon",
    "gamma",
    "hidden",
    "horizon",
    "lr_actor",
    "lr_alpha",
    "lr_critic",
    "replay_capacity",
    "reset_mode",
    "start_state",
    "target_entropy",
    "tau",
    "time_budget_s",
    "total_steps",
    "warmup_steps",
];

fn join<F: Scalar>(v: &[F]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl<F: Scalar> TrainConfig<F> {
    /// Documented defaults for `system` trained on `reward`.
    pub fn new(system: SystemModel<F>, reward: RewardSpec<F>) -> Self {
        let horizon = default_episode_horizon(system.kind());
        Self {
            system,
            reward,
            sac: SacSettings::default(),
            replay_capacity: 1_000_000,
            batch_size: 256,
            horizon,
            total_steps: 200_000,
            warmup_steps: 1000,
            seed: 0,
            reset_mode: ResetMode::FixedStart,
            start_state: None,
            eval_every: 10_000,
            eval_episodes: 5,
            eval_horizon: horizon,
            time_budget: None,
        }
    }

    /// Reads `system`, `<system>.*`, `reward.*`, `seed` and `train.*` keys.
    /// Unknown `train.*` keys are rejected; other namespaces are ignored.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let name = cfg.get("system").unwrap_or("pendulum");
        let system = make_system::<F>(name, &cfg.system_overrides(name)?)?;
        let reward = RewardSpec::from_config(cfg, &system)?;
        let mut tc = Self::new(system, reward);
        for (k, _) in cfg.iter() {
            if let Some(rest) = k.strip_prefix("train.") {
                if !TRAIN_KEYS.contains(&rest) {
                    return Err(Error::setting(k, "unknown key"));
                }
            }
        }
        let real = |key: &str, slot: &mut F| -> Result<()> {
            if let Some(v) = cfg.value::<f64>(key)? {
                *slot = F::lit(v);
            }
            Ok(())
        };
        real("train.gamma", &mut tc.sac.gamma)?;
        real("train.tau", &mut tc.sac.tau)?;
        real("train.alpha", &mut tc.sac.alpha)?;
        real("train.lr_actor", &mut tc.sac.lr_actor)?;
        real("train.lr_critic", &mut tc.sac.lr_critic)?;
        real("train.lr_alpha", &mut tc.sac.lr_alpha)?;
        if let Some(v) = cfg.value::<f64>("train.target_entropy")? {
            tc.sac.target_entropy = Some(F::lit(v));
        }
        tc.sac.auto_alpha = cfg.parse_or("train.auto_alpha", tc.sac.auto_alpha)?;
        if let Some(h) = cfg.get("train.hidden") {
            tc.sac.hidden = h
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::setting("train.hidden", format!("bad size `{t}`")))
                })
                .collect::<Result<_>>()?;
        }
        tc.replay_capacity = cfg.parse_or("train.replay_capacity", tc.replay_capacity)?;
        tc.batch_size = cfg.parse_or("train.batch_size", tc.batch_size)?;
        tc.horizon = cfg.parse_or("train.horizon", tc.horizon)?;
        tc.eval_horizon = cfg.parse_or("train.eval_horizon", tc.horizon)?;
        tc.total_steps = cfg.parse_or("train.total_steps", tc.total_steps)?;
        tc.warmup_steps = cfg.parse_or("train.warmup_steps", tc.warmup_steps)?;
        tc.seed = cfg.parse_or("seed", tc.seed)?;
        if let Some(m) = cfg.get("train.reset_mode") {
            tc.reset_mode = m.parse()?;
        }
        if let Some(s) = cfg.get("train.start_state") {
            tc.start_state = Some(StateVector(parse_list(s)?));
        }
        tc.eval_every = cfg.parse_or("train.eval_every", tc.eval_every)?;
        tc.eval_episodes = cfg.parse_or("train.eval_episodes", tc.eval_episodes)?;
        if let Some(secs) = cfg.value::<f64>("train.time_budget_s")? {
            tc.time_budget = Some(Duration::from_secs_f64(secs.max(0.0)));
        }
        tc.validate()?;
        Ok(tc)
    }

    /// Every setting, including defaults, as a config.
    pub fn to_config(&self) -> Config {
        let mut cfg = Config::default();
        let name = self.system.name();
        cfg.set("system", name);
        for (k, v) in self.system.params() {
            cfg.set(&format!("{name}.{k}"), v);
        }
        self.reward.write_config(&mut cfg);
        cfg.set("seed", self.seed);
        let s = &self.sac;
        cfg.set("train.gamma", s.gamma);
        cfg.set("train.tau", s.tau);
        cfg.set("train.alpha", s.alpha);
        cfg.set("train.auto_alpha", s.auto_alpha);
        if let Some(t) = s.target_entropy {
            cfg.set("train.target_entropy", t);
        }
        cfg.set("train.lr_actor", s.lr_actor);
        cfg.set("train.lr_critic", s.lr_critic);
        cfg.set("train.lr_alpha", s.lr_alpha);
        cfg.set(
            "train.hidden",
            s.hidden.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        );
        cfg.set("train.replay_capacity", self.replay_capacity);
        cfg.set("train.batch_size", self.batch_size);
        cfg.set("train.horizon", self.horizon);
        cfg.set("train.eval_horizon", self.eval_horizon);
        cfg.set("train.total_steps", self.total_steps);
        cfg.set("train.warmup_steps", self.warmup_steps);
        cfg.set("train.reset_mode", self.reset_mode.as_str());
        if let Some(s) = &self.start_state {
            cfg.set("train.start_state", join(s));
        }
        cfg.set("train.eval_every", self.eval_every);
        cfg.set("train.eval_episodes", self.eval_episodes);
        if let Some(b) = self.time_budget {
            cfg.set("train.time_budget_s", b.as_secs_f64());
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sac;
        if !(s.gamma >= F::zero() && s.gamma < F::one()) {
            return Err(Error::setting("train.gamma", "must be in [0, 1)"));
        }
        if !(s.tau > F::zero() && s.tau <= F::one()) {
            return Err(Error::setting("train.tau", "must be in (0, 1]"));
        }
        if !(s.alpha >= F::zero()) || (s.auto_alpha && s.alpha <= F::zero()) {
            return Err(Error::setting(
                "train.alpha",
                "must be non-negative, and positive when auto-tuned",
            ));
        }
        if s.hidden.is_empty() || s.hidden.contains(&0) {
            return Err(Error::setting("train.hidden", "needs at least one non-empty layer"));
        }
        for (key, v) in [
            ("train.horizon", self.horizon),
            ("train.batch_size", self.batch_size),
            ("train.replay_capacity", self.replay_capacity),
            ("train.eval_every", self.eval_every),
            ("train.eval_horizon", self.eval_horizon),
        ] {
            if v == 0 {
                return Err(Error::setting(key, "must be at least 1"));
            }
        }
        if self.system.action_dim() == 0 {
            return Err(Error::setting(
                "system",
                format!("{} has no actuator", self.system.name()),
            ));
        }
        if let Some(s) = &self.start_state {
            self.system.check_state(s)?;
        }
        self.reward.validate(&self.system)?;
        Ok(())
    }
}

/// Summary of one evaluation during training.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint<F> {
    pub step: usize,
    /// Final-window mean error, averaged over evaluation episodes.
    pub mean_error: F,
    /// Unbiased variance of the final-window mean across episodes.
    pub variance: F,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<F> {
    pub agent: Sac<F>,
    pub curve: Vec<CurvePoint<F>>,
    pub final_eval: EvalCurve<F>,
    pub env_steps: usize,
    pub episodes: usize,
    pub last_stats: Option<UpdateStats<F>>,
    /// Set when the wall-clock budget ended the run early.
    pub partial: bool,
}

/// Deterministic evaluation of the policy mean.
pub fn evaluate_agent<F: Scalar>(agent: &Sac<F>, cfg: &TrainConfig<F>) -> Result<EvalCurve<F>> {
    let sys = &cfg.system;
    let policy = |s: &[F]| agent.actor.mean_action(&observe(sys, s));
    let start = match cfg.reset_mode {
        ResetMode::FixedStart => cfg.start_state.as_ref(),
        ResetMode::RandomStart => None,
    };
    evaluate(&policy, sys, cfg.eval_episodes, cfg.eval_horizon, start)
}

fn curve_point<F: Scalar>(step: usize, eval: &EvalCurve<F>) -> CurvePoint<F> {
    let per = &eval.final_by_episode;
    let k = per.len();
    let mean = per.iter().copied().sum::<F>() / F::from_usize_lossy(k.max(1));
    let variance = if k > 1 {
        per.iter().map(|&x| (x - mean) * (x - mean)).sum::<F>() / F::from_usize_lossy(k - 1)
    } else {
        F::zero()
    };
    CurvePoint {
        step,
        mean_error: mean,
        variance,
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Callback receiving each curve point.
pub type Progress<'a, F> = &'a mut dyn FnMut(&CurvePoint<F>);

/// Trains an agent. With `out_dir`, the agent is checkpointed to
/// `out_dir/checkpoint.bin` after every evaluation. `progress` sees every
/// curve point as it is produced.
pub fn train<F: Scalar>(
    cfg: &TrainConfig<F>,
    out_dir: Option<&Path>,
    mut progress: Option<Progress<'_, F>>,
) -> Result<TrainOutcome<F>> {
    cfg.validate()?;
    let started = Instant::now();
    let sys = &cfg.system;
    let obs_dim = observation_dim(sys);
    let act_dim = sys.action_dim();
    let hash = config_hash(&cfg.to_config().to_string());

    let mut agent = Sac::new(
        obs_dim,
        sys.action_low().to_vec(),
        sys.action_high().to_vec(),
        cfg.sac.clone(),
        &mut stream(cfg.seed, 0),
    );
    let mut env_rng = stream(cfg.seed, 1);
    let mut update_rng = stream(cfg.seed, 2);
    let mut replay = ReplayBuffer::new(cfg.replay_capacity, obs_dim, act_dim);

    let mut curve = Vec::new();
    let mut env_steps = 0;
    let mut episodes = 0;
    let mut next_eval = cfg.eval_every;
    let mut last_stats = None;
    let mut partial = false;
    let mut obs = Vec::with_capacity(obs_dim);
    let mut next_obs = Vec::with_capacity(obs_dim);

    while env_steps < cfg.total_steps {
        if cfg.time_budget.is_some_and(|b| started.elapsed() > b) {
            partial = true;
            break;
        }
        let h = cfg.horizon.min(cfg.total_steps - env_steps);
        let warm = env_steps < cfg.warmup_steps;
        let (low, high) = (sys.action_low().to_vec(), sys.action_high().to_vec());
        let mut act = |s: &[F], rng: &mut ChaCha8Rng| -> Vec<F> {
            if warm {
                low.iter()
                    .zip(&high)
                    .map(|(&lo, &hi)| lo + (hi - lo) * F::lit(rng.random::<f64>()))
                    .collect()
            } else {
                agent.actor.sample(&observe(sys, s), rng)
            }
        };
        let meta = TrajectoryMeta {
            seed: cfg.seed,
            reward_kind: cfg.reward.kind().as_str().to_string(),
            reset_mode: cfg.reset_mode,
            policy_version: agent.updates(),
        };
        let mean_policy = |s: &[F]| agent.actor.mean_action(&observe(sys, s));
        let traj = collect_rollout(
            sys,
            &cfg.reward,
            &mut act,
            h,
            cfg.reset_mode,
            cfg.start_state.as_ref(),
            &mut env_rng,
            meta,
            Some(&mean_policy),
        )?;
        episodes += 1;
        let collected = traj.len().max(1);
        env_steps += collected;
        for tr in &traj.transitions {
            obs.clear();
            next_obs.clear();
            observe_into(sys, &tr.state, &mut obs);
            observe_into(sys, &tr.next_state, &mut next_obs);
            replay.push(&obs, &agent.actor.unscale(&tr.action), tr.reward, &next_obs, tr.done);
        }

        if env_steps >= cfg.warmup_steps && replay.len() >= cfg.batch_size {
            let n_updates = collected.min(env_steps - cfg.warmup_steps.min(env_steps));
            for _ in 0..n_updates {
                let batch = replay.sample(cfg.batch_size, &mut update_rng);
                last_stats = Some(agent.update(&batch, &mut update_rng)?);
            }
        }

        if env_steps >= next_eval {
            let eval = evaluate_agent(&agent, cfg)?;
            let point = curve_point(env_steps, &eval);
            if let Some(p) = progress.as_mut() {
                p(&point);
            }
            curve.push(point);
            if let Some(dir) = out_dir {
                save_checkpoint(&agent, hash, &dir.join("checkpoint.bin"))?;
            }
            while next_eval <= env_steps {
                next_eval += cfg.eval_every;
            }
        }
    }

    let final_eval = evaluate_agent(&agent, cfg)?;
    if curve.last().is_none_or(|p: &CurvePoint<F>| p.step != env_steps) {
        let point = curve_point(env_steps, &final_eval);
        if let Some(p) = progress.as_mut() {
            p(&point);
        }
        curve.push(point);
    }
    if let Some(dir) = out_dir {
        save_checkpoint(&agent, hash, &dir.join("checkpoint.bin"))?;
    }
    Ok(TrainOutcome {
        agent,
        curve,
        final_eval,
        env_steps,
        episodes,
        last_stats,
        partial,
    })
}

/// `step,mean_error,variance,reward_kind,seed` rows.
pub fn learning_curve_csv<F: Scalar>(curve: &[CurvePoint<F>], reward_kind: &str, seed: u64) -> String {
    let mut out = String::from("step,mean_error,variance,reward_kind,seed\n");
    for p in curve {
        let _ = writeln!(out, "{},{},{},{reward_kind},{seed}", p.step, p.mean_error, p.variance);
    }
    out
}

/// `t,mean_error,variance,reward_kind,seed` rows, `t` counting steps from 1.
pub fn eval_curve_csv<F: Scalar>(eval: &EvalCurve<F>, reward_kind: &str, seed: u64) -> String {
    let mut out = String::from("t,mean_error,variance,reward_kind,seed\n");
    for (t, (m, v)) in eval.mean.iter().zip(&eval.variance).enumerate() {
        let _ = writeln!(out, "{},{m},{v},{reward_kind},{seed}", t + 1);
    }
    out
}
