use crate::failure::{runtime, usage, Outcome};
use crate::Common;
use clap::Args;
use std::path::{Path, PathBuf};
use suple_core::landscape::{evaluate_grid, export, pairwise_slices, slice_range, GridSpec};
use suple_core::rewards::default_horizon;
use suple_core::{
    make_system, maxle, suple, truncated_spectrum, Config, ControlInput, ControlSource, RewardKind, SpectrumSettings,
    System,
};
use suple_experiments::provenance::header;
use suple_experiments::{run_comparison, ExperimentPlan};
use suple_learn::features::observation_dim;
use suple_learn::train::evaluate_agent;
use suple_learn::{
    config_hash, eval_curve_csv, learning_curve_csv, load_checkpoint, CurvePoint, Training, FINAL_WINDOW,
};

/// Comma-separated numbers, e.g. `3.14159,0`.
#[derive(Clone, Debug)]
pub struct Numbers(Vec<f64>);

fn number_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect()
}

fn numbers(s: &str) -> Result<Numbers, String> {
    number_list(s).map(Numbers)
}

fn list_text(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated values, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<T>().map_err(|_| format!("cannot parse `{t}`"));
    Ok((parse(a)?, parse(b)?))
}

fn output_root(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os("SUPLE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

/// Config file, then `--set` overrides, then the seed.
fn base_config(common: &Common, file: Option<&Path>) -> Outcome<Config> {
    let mut cfg = match file.or(common.config.as_deref()) {
        Some(path) => Config::load(path).map_err(|e| usage(e.to_string()))?,
        None => Config::default(),
    };
    for o in &common.overrides {
        cfg.apply_assignment(o).map_err(|e| usage(format!("--set {o}: {e}")))?;
    }
    if let Some(seed) = common.seed {
        cfg.set("seed", seed);
    }
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| runtime(e.to_string()))?;
    }
    Ok(cfg)
}

fn echo(cfg: &Config) {
    println!("# resolved config");
    print!("{cfg}");
    println!();
}

fn load_system(cfg: &Config) -> Outcome<System> {
    let name = cfg.get("system").unwrap_or("pendulum");
    Ok(make_system(name, &cfg.system_overrides(name)?)?)
}

/// The system's parameters, all written out.
fn write_system(cfg: &mut Config, system: &System) {
    cfg.set("system", system.name());
    for (k, v) in system.params() {
        cfg.set(&format!("{}.{k}", system.name()), v);
    }
}

fn get_list(cfg: &Config, key: &str) -> Outcome<Option<Vec<f64>>> {
    cfg.get(key)
        .map(|v| number_list(v).map_err(|e| usage(format!("{key}: {e}"))))
        .transpose()
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Outcome {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| runtime(format!("creating {}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| runtime(format!("writing {}: {e}", path.display())))
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    /// System name: pendulum, cartpole, double_pendulum, linear or lorenz.
    #[arg(long)]
    system: Option<String>,
    /// Initial state, comma-separated [config: spectrum.state].
    #[arg(long, value_parser = numbers, allow_hyphen_values = true)]
    state: Option<Numbers>,
    /// Horizon in integration steps [config: spectrum.horizon].
    #[arg(long = "T", value_name = "STEPS")]
    horizon: Option<usize>,
    /// Re-orthogonalization stride [config: spectrum.stride].
    #[arg(long)]
    stride: Option<usize>,
    /// Action held for the whole horizon; zero if omitted [config: spectrum.action].
    #[arg(long, value_parser = numbers, allow_hyphen_values = true)]
    action: Option<Numbers>,
}

pub fn spectrum(a: SpectrumArgs) -> Outcome {
    let mut cfg = base_config(&a.common, None)?;
    if let Some(s) = &a.system {
        cfg.set("system", s);
    }
    if let Some(s) = &a.state {
        cfg.set("spectrum.state", list_text(&s.0));
    }
    if let Some(t) = a.horizon {
        cfg.set("spectrum.horizon", t);
    }
    if let Some(s) = a.stride {
        cfg.set("spectrum.stride", s);
    }
    if let Some(u) = &a.action {
        cfg.set("spectrum.action", list_text(&u.0));
    }
    let system = load_system(&cfg)?;
    write_system(&mut cfg, &system);
    cfg.set_default("spectrum.horizon", default_horizon(system.kind()));
    cfg.set_default("spectrum.stride", 1);
    let state = get_list(&cfg, "spectrum.state")?.ok_or_else(|| usage("no state given (use --state)"))?;
    let horizon: usize = cfg.parse_or("spectrum.horizon", 0)?;
    let stride: usize = cfg.parse_or("spectrum.stride", 1)?;
    let action = get_list(&cfg, "spectrum.action")?;
    echo(&cfg);

    system.check_state(&state).map_err(|e| usage(e.to_string()))?;
    let control = match action {
        None => ControlSource::Zero,
        Some(u) => {
            if u.len() != system.action_dim() {
                return Err(usage(format!(
                    "action has {} entries, {} takes {}",
                    u.len(),
                    system.name(),
                    system.action_dim()
                )));
            }
            ControlSource::Held(ControlInput(u))
        }
    };
    let settings = SpectrumSettings::new(horizon).with_stride(stride);
    let sp = truncated_spectrum(&system, &state, &settings, &control)?;
    for (i, l) in sp.exponents.iter().enumerate() {
        println!("lambda_{} = {l:.6}", i + 1);
    }
    println!("suple = {:.6}", suple(&sp));
    println!("maxle = {:.6}", maxle(&sp));
    Ok(())
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[command(flatten)]
    common: Common,
    /// System name: pendulum, cartpole, double_pendulum, linear or lorenz.
    #[arg(long)]
    system: Option<String>,
    /// Varied coordinates `i,j` [config: landscape.axes].
    #[arg(long, value_parser = pair::<usize>)]
    axes: Option<(usize, usize)>,
    /// Cells per axis [config: landscape.resolution].
    #[arg(long)]
    res: Option<usize>,
    /// `suple` or `maxle` [config: landscape.reward].
    #[arg(long)]
    reward: Option<String>,
    /// Spectrum horizon in integration steps [config: landscape.horizon].
    #[arg(long = "T", value_name = "STEPS")]
    horizon: Option<usize>,
    /// Range of the first axis [config: landscape.range_i].
    #[arg(long, value_parser = pair::<f64>, allow_hyphen_values = true)]
    range_i: Option<(f64, f64)>,
    /// Range of the second axis [config: landscape.range_j].
    #[arg(long, value_parser = pair::<f64>, allow_hyphen_values = true)]
    range_j: Option<(f64, f64)>,
    /// Values of the coordinates not varied; the goal if omitted [config: landscape.at].
    #[arg(long, value_parser = numbers, allow_hyphen_values = true)]
    at: Option<Numbers>,
    /// Every coordinate pair, other coordinates at the goal [config: landscape.all_pairs].
    #[arg(long)]
    all_pairs: bool,
}

pub fn landscape(a: LandscapeArgs) -> Outcome {
    let mut cfg = base_config(&a.common, None)?;
    if let Some(s) = &a.system {
        cfg.set("system", s);
    }
    if let Some((i, j)) = a.axes {
        cfg.set("landscape.axes", format!("{i},{j}"));
    }
    if let Some(r) = a.res {
        cfg.set("landscape.resolution", r);
    }
    if let Some(r) = &a.reward {
        cfg.set("landscape.reward", r);
    }
    if let Some(t) = a.horizon {
        cfg.set("landscape.horizon", t);
    }
    if let Some((lo, hi)) = a.range_i {
        cfg.set("landscape.range_i", format!("{lo},{hi}"));
    }
    if let Some((lo, hi)) = a.range_j {
        cfg.set("landscape.range_j", format!("{lo},{hi}"));
    }
    if let Some(v) = &a.at {
        cfg.set("landscape.at", list_text(&v.0));
    }
    if a.all_pairs {
        cfg.set("landscape.all_pairs", true);
    }
    let system = load_system(&cfg)?;
    write_system(&mut cfg, &system);
    cfg.set_default("landscape.axes", "0,1");
    cfg.set_default("landscape.resolution", 101);
    cfg.set_default("landscape.reward", "suple");
    cfg.set_default("landscape.horizon", default_horizon(system.kind()));
    cfg.set_default("landscape.all_pairs", false);
    let (ai, aj) =
        pair::<usize>(cfg.get("landscape.axes").unwrap()).map_err(|e| usage(format!("landscape.axes: {e}")))?;
    for (key, k) in [("landscape.range_i", ai), ("landscape.range_j", aj)] {
        if k < system.state_dim() {
            let (lo, hi) = slice_range(&system, k);
            cfg.set_default(key, format!("{lo},{hi}"));
        }
    }
    cfg.set_default("landscape.at", list_text(system.goal()));
    let resolution: usize = cfg.parse_or("landscape.resolution", 101)?;
    let horizon: usize = cfg.parse_or("landscape.horizon", 0)?;
    let all_pairs: bool = cfg.parse_or("landscape.all_pairs", false)?;
    let reward: RewardKind = cfg.get("landscape.reward").unwrap().parse()?;
    let range = |key: &str| -> Outcome<(f64, f64)> {
        cfg.get(key)
            .map(pair::<f64>)
            .transpose()
            .map_err(|e| usage(format!("{key}: {e}")))?
            .ok_or_else(|| usage(format!("{key}: axis out of range")))
    };
    let spec = GridSpec {
        axis_i: ai,
        axis_j: aj,
        range_i: range("landscape.range_i")?,
        range_j: range("landscape.range_j")?,
        resolution,
        fixed_values: get_list(&cfg, "landscape.at")?.unwrap_or_default(),
    };
    echo(&cfg);

    let grids = if all_pairs {
        pairwise_slices(&system, resolution, horizon, reward, true)?
    } else {
        vec![evaluate_grid(&system, &spec, reward, horizon, true)?]
    };
    let root = output_root(&a.common);
    for g in &grids {
        let stem = root.join(format!(
            "landscape-{}-{}-{}-{}",
            system.name(),
            reward.as_str(),
            g.spec.axis_i,
            g.spec.axis_j
        ));
        let (csv, ppm) = export(g, &stem)?;
        let peak = g
            .argmax()
            .map(|(i, j)| format!("({:.6}, {:.6})", g.spec.coord_i(i), g.spec.coord_j(j)))
            .unwrap_or_else(|| "none".into());
        println!("wrote {} and {}", csv.display(), ppm.display());
        println!(
            "axes {},{}: argmax at {peak}, blow-ups {}",
            g.spec.axis_i, g.spec.axis_j, g.blow_ups
        );
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// System name: pendulum, cartpole, double_pendulum, linear or lorenz.
    #[arg(long)]
    system: Option<String>,
    /// suple, maxle, quadratic or sparse [config: reward.kind].
    #[arg(long)]
    reward: Option<String>,
    /// Environment steps [config: train.total_steps].
    #[arg(long)]
    steps: Option<usize>,
}

pub fn train(a: TrainArgs) -> Outcome {
    let mut cfg = base_config(&a.common, None)?;
    if let Some(s) = &a.system {
        cfg.set("system", s);
    }
    if let Some(r) = &a.reward {
        cfg.set("reward.kind", r);
    }
    if let Some(n) = a.steps {
        cfg.set("train.total_steps", n);
    }
    let tc = Training::from_config(&cfg)?;
    let resolved = tc.to_config();
    echo(&resolved);

    let kind = tc.reward.kind().as_str();
    let dir = output_root(&a.common).join(format!("train-{}-{kind}-seed-{}", tc.system.name(), tc.seed));
    std::fs::create_dir_all(&dir).map_err(|e| runtime(format!("creating {}: {e}", dir.display())))?;
    write(&dir.join("config.txt"), resolved.to_string())?;
    let mut progress = |p: &CurvePoint<f64>| {
        eprintln!(
            "step {:>9}  error {:.6}  variance {:.6}",
            p.step, p.mean_error, p.variance
        );
    };
    let out = suple_learn::train(&tc, Some(&dir), Some(&mut progress))?;
    let head = header(&resolved, &[tc.seed]);
    write(
        &dir.join("curve.csv"),
        format!("{head}{}", learning_curve_csv(&out.curve, kind, tc.seed)),
    )?;
    write(
        &dir.join("eval.csv"),
        format!("{head}{}", eval_curve_csv(&out.final_eval, kind, tc.seed)),
    )?;
    if out.partial {
        println!("time budget reached after {} steps", out.env_steps);
    }
    println!("wrote {}", dir.display());
    print_summary(&out.final_eval);
    Ok(())
}

fn print_summary(eval: &suple_learn::EvalCurve<f64>) {
    println!("final_mean_error = {:.6}", eval.final_mean(FINAL_WINDOW));
    println!("final_max_error = {:.6}", eval.final_max(FINAL_WINDOW));
    for (i, e) in eval.final_per_angle(FINAL_WINDOW).iter().enumerate() {
        println!("final_angle_{} = {e:.6}", i + 1);
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Checkpoint written by `train` or `compare`.
    #[arg(long, value_name = "PATH")]
    checkpoint: PathBuf,
    /// Evaluation episodes [config: train.eval_episodes].
    #[arg(long)]
    episodes: Option<usize>,
    /// Steps per episode [config: train.eval_horizon].
    #[arg(long)]
    horizon: Option<usize>,
}

pub fn eval(a: EvalArgs) -> Outcome {
    let sibling = a.checkpoint.with_file_name("config.txt");
    let file = (a.common.config.is_none() && sibling.is_file()).then_some(sibling.as_path());
    let mut cfg = base_config(&a.common, file)?;
    let trained = Training::from_config(&cfg)?;
    if let Some(n) = a.episodes {
        cfg.set("train.eval_episodes", n);
    }
    if let Some(h) = a.horizon {
        cfg.set("train.eval_horizon", h);
    }
    let tc = Training::from_config(&cfg)?;
    echo(&tc.to_config());

    let ckpt = load_checkpoint::<f64>(&a.checkpoint)?;
    if ckpt.config_hash != config_hash(&trained.to_config().to_string()) {
        eprintln!("warning: the checkpoint was trained with a different config");
    }
    let sys = &tc.system;
    if ckpt.actor.net.input_dim() != observation_dim(sys) || ckpt.actor.action_dim() != sys.action_dim() {
        return Err(usage(format!("checkpoint does not fit {}", sys.name())));
    }
    let agent = ckpt.into_agent(tc.sac.clone());
    let eval = evaluate_agent(&agent, &tc)?;
    if let Some(path) = &a.common.out {
        let kind = tc.reward.kind().as_str();
        write(
            path,
            format!(
                "{}{}",
                header(&tc.to_config(), &[tc.seed]),
                eval_curve_csv(&eval, kind, tc.seed)
            ),
        )?;
        println!("wrote {}", path.display());
    }
    print_summary(&eval);
    Ok(())
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// Plan file.
    #[arg(long, value_name = "PATH")]
    plan: PathBuf,
    /// Runs per reward [config: plan.seeds].
    #[arg(long)]
    seeds: Option<usize>,
    /// Runs trained concurrently [config: plan.jobs].
    #[arg(long)]
    jobs: Option<usize>,
    /// Error below which a run counts as solved in the summary.
    #[arg(long, default_value_t = 0.2)]
    tol: f64,
}

pub fn compare(a: CompareArgs) -> Outcome {
    let mut cfg = Config::load(&a.plan).map_err(|e| usage(e.to_string()))?;
    if let Some(stem) = a.plan.file_stem().and_then(|s| s.to_str()) {
        cfg.set_default("plan.name", stem);
    }
    let mut common = a.common.clone();
    common.config = None;
    let mut extra = base_config(&common, None)?;
    if let Some(seed) = extra.remove("seed") {
        extra.set("plan.seed_base", seed);
    }
    cfg.merge(&extra);
    if let Some(n) = a.seeds {
        cfg.set("plan.seeds", n);
    }
    if let Some(n) = a.jobs {
        cfg.set("plan.jobs", n);
    }
    if a.common.out.is_some() || std::env::var_os("SUPLE_OUT").is_some() {
        cfg.set("plan.output", output_root(&a.common).display());
    }
    let plan = ExperimentPlan::from_config(&cfg)?;
    echo(&plan.to_config());
    if plan.extended {
        eprintln!("note: {} is an extended plan and may run for hours", plan.name);
    }
    let progress = |r: &suple_experiments::RunRecord| match &r.result {
        Ok(s) => eprintln!("{} seed {}: final error {:.6}", r.reward, r.seed, s.final_mean),
        Err(e) => eprintln!("{} seed {}: failed: {e}", r.reward, r.seed),
    };
    let res = run_comparison(&plan, Some(&progress))?;
    println!("wrote {}", res.dir.display());
    println!("reward      runs  failed  solved  final_mean_error");
    for r in &plan.rewards {
        let ok: Vec<_> = res.runs_for(*r).filter_map(|x| x.result.as_ref().ok()).collect();
        let solved = ok.iter().filter(|s| s.holds_below(a.tol)).count();
        let mean = ok.iter().map(|s| s.final_mean).sum::<f64>() / ok.len().max(1) as f64;
        println!(
            "{:<10}  {:>4}  {:>6}  {:>6}  {mean:.6}",
            r.as_str(),
            ok.len(),
            plan.seeds - ok.len(),
            solved
        );
    }
    if res.failed() > 0 {
        println!("failed runs: {} (see manifest.txt)", res.failed());
    }
    Ok(())
}
