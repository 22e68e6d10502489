use proptest::prelude::*;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use suple_core::{Config, RewardKind};
use suple_experiments::provenance::{embedded_config, strip_header};
use suple_experiments::{aggregate, run_comparison, run_comparison_in, Error, ExperimentPlan, GIT_DESCRIBE};
use suple_learn::CurvePoint;

fn plans_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../plans")
}

fn curve(values: &[f64]) -> Vec<CurvePoint<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| CurvePoint {
            step: 100 * (i + 1),
            mean_error: v,
            variance: 0.0,
        })
        .collect()
}

#[test]
fn aggregate_of_one_curve_is_the_curve() {
    let a = aggregate(&[(3, curve(&[3.0, 1.0, 0.5]))]).unwrap();
    assert_eq!(a.seeds, vec![3]);
    assert_eq!(a.steps, vec![100, 200, 300]);
    assert_eq!(a.mean, vec![3.0, 1.0, 0.5]);
    assert_eq!(a.variance, vec![0.0; 3]);
}

#[test]
fn aggregate_of_identical_curves_has_zero_variance() {
    let c = curve(&[2.5, 0.25]);
    let a = aggregate(&[(0, c.clone()), (1, c.clone()), (2, c)]).unwrap();
    assert_eq!(a.mean, vec![2.5, 0.25]);
    assert_eq!(a.variance, vec![0.0, 0.0]);
}

#[test]
fn aggregate_uses_unbiased_variance() {
    let a = aggregate(&[(0, curve(&[0.0, 0.0])), (1, curve(&[2.0, 2.0]))]).unwrap();
    assert_eq!(a.mean, vec![1.0, 1.0]);
    assert_eq!(a.variance, vec![2.0, 2.0]);
}

#[test]
fn aggregate_rejects_mismatched_curves() {
    let err = aggregate(&[(0, curve(&[1.0, 2.0])), (1, curve(&[1.0]))]).unwrap_err();
    assert!(matches!(err, Error::IncompatibleCurves(_)));
    assert!(err.to_string().starts_with("incompatible curves"));

    let mut shifted = curve(&[1.0, 2.0]);
    shifted[1].step += 1;
    assert!(matches!(
        aggregate(&[(0, curve(&[1.0, 2.0])), (1, shifted)]),
        Err(Error::IncompatibleCurves(_))
    ));
    assert!(matches!(aggregate(&[]), Err(Error::IncompatibleCurves(_))));
    assert!(matches!(
        aggregate(&[(4, curve(&[1.0])), (4, curve(&[2.0]))]),
        Err(Error::IncompatibleCurves(_))
    ));
}

proptest! {
    #[test]
    fn aggregate_ignores_input_order(
        values in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 6), 1..7),
        rotation in 0usize..7,
    ) {
        let curves: Vec<_> = values.iter().enumerate().map(|(i, v)| (i as u64 * 7 + 1, curve(v))).collect();
        let mut permuted = curves.clone();
        permuted.reverse();
        let r = rotation % permuted.len();
        permuted.rotate_left(r);
        let a = aggregate(&curves).unwrap();
        let b = aggregate(&permuted).unwrap();
        prop_assert_eq!(&a, &b);
        for t in 0..6 {
            let lo = values.iter().map(|v| v[t]).fold(f64::INFINITY, f64::min);
            let hi = values.iter().map(|v| v[t]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(a.mean[t] >= lo - 1e-12 && a.mean[t] <= hi + 1e-12);
            prop_assert!(a.variance[t] >= 0.0);
        }
    }
}

#[test]
fn plan_defaults_and_validation() {
    let plan = ExperimentPlan::from_config(&Config::default()).unwrap();
    assert_eq!(plan.rewards, RewardKind::ALL.to_vec());
    assert_eq!(plan.seeds, 5);
    assert_eq!(plan.seed_list(), vec![0, 1, 2, 3, 4]);
    assert_eq!(plan.system_name(), "pendulum");

    let bad = |text: &str| ExperimentPlan::from_config(&text.parse().unwrap()).unwrap_err();
    assert!(matches!(bad("plan.colour=red"), Error::Plan { .. }));
    assert!(matches!(bad("plan.seeds=0"), Error::Plan { .. }));
    assert!(matches!(bad("plan.rewards=suple,suple"), Error::Plan { .. }));
    assert!(matches!(bad("plan.rewards=curiosity"), Error::Core(_)));
    assert!(matches!(bad("train.bogus=1"), Error::Learn(_)));
    assert!(bad("system=tricycle").to_string().contains("tricycle"));
}

#[test]
fn resolved_config_pins_reward_and_seed() {
    let plan: ExperimentPlan =
        ExperimentPlan::from_config(&"plan.seed_base=10\nplan.seeds=2".parse().unwrap()).unwrap();
    assert_eq!(plan.seed_list(), vec![10, 11]);
    let cfg = plan.resolved_config(RewardKind::Sparse, 11).unwrap();
    assert_eq!(cfg.get("reward.kind"), Some("sparse"));
    assert_eq!(cfg.get("seed"), Some("11"));
    assert_eq!(cfg.get("train.total_steps"), Some("200000"));
    let again = ExperimentPlan::from_config(&plan.to_config()).unwrap();
    assert_eq!(again, plan);
}

#[test]
fn shipped_plans_load() {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(plans_dir()).unwrap() {
        let path = entry.unwrap().path();
        let plan = ExperimentPlan::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(plan.name, path.file_name().unwrap().to_str().unwrap());
        assert_eq!(plan.extended, plan.name != "fig2a", "{}", plan.name);
        names.push(plan.name);
    }
    names.sort();
    assert_eq!(
        names,
        [
            "fig2a",
            "fig2a-full",
            "fig2b",
            "fig2b-full",
            "fig2c",
            "fig2c-full",
            "fig4",
            "fig4-full"
        ]
    );
}

fn config_diff(a: &Config, b: &Config) -> BTreeSet<String> {
    let keys: BTreeSet<&str> = a.iter().chain(b.iter()).map(|(k, _)| k).collect();
    keys.into_iter()
        .filter(|k| a.get(k) != b.get(k))
        .map(str::to_string)
        .collect()
}

#[test]
fn ablation_plans_differ_only_in_reset_mode() {
    for (fixed, random) in [("fig2c", "fig4"), ("fig2c-full", "fig4-full")] {
        let a = ExperimentPlan::load(plans_dir().join(fixed)).unwrap();
        let b = ExperimentPlan::load(plans_dir().join(random)).unwrap();
        assert_eq!(a.rewards, b.rewards);
        assert_eq!(a.seed_list(), b.seed_list());
        for &r in &a.rewards {
            for seed in a.seed_list() {
                let diff = config_diff(
                    &a.resolved_config(r, seed).unwrap(),
                    &b.resolved_config(r, seed).unwrap(),
                );
                assert_eq!(
                    diff,
                    BTreeSet::from(["train.reset_mode".to_string()]),
                    "{fixed} vs {random}"
                );
            }
        }
    }
}

fn tiny_plan(extra: &str) -> ExperimentPlan {
    let text = format!(
        "plan.name=tiny\nsystem=pendulum\npendulum.dt=0.05\ntrain.hidden=8,8\ntrain.horizon=60\n\
         train.total_steps=240\ntrain.warmup_steps=60\ntrain.batch_size=16\ntrain.eval_every=120\n\
         train.eval_episodes=2\ntrain.eval_horizon=60\n{extra}"
    );
    ExperimentPlan::from_config(&text.parse().unwrap()).unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn single_run_comparison_aggregates_to_its_curve() {
    let dir = tempfile::tempdir().unwrap();
    let plan = tiny_plan("plan.rewards=quadratic\nplan.seeds=1\nplan.seed_base=7");
    let res = run_comparison_in(&plan, dir.path(), None).unwrap();
    assert_eq!(res.runs.len(), 1);
    let run = res.runs[0].result.as_ref().unwrap();
    assert_eq!(run.env_steps, 240);
    let agg = res.rewards[0].aggregate.as_ref().unwrap();
    assert_eq!(agg.seeds, vec![7]);
    assert_eq!(agg.steps, run.curve.iter().map(|p| p.step).collect::<Vec<_>>());
    assert_eq!(agg.mean, run.curve.iter().map(|p| p.mean_error).collect::<Vec<_>>());
    assert_eq!(agg.variance, vec![0.0; agg.steps.len()]);

    let rd = dir.path().join("quadratic/seed-7");
    for f in ["config.txt", "curve.csv", "eval.csv", "checkpoint.bin"] {
        assert!(rd.join(f).is_file(), "{f}");
    }
    let resolved = plan.resolved_config(RewardKind::Quadratic, 7).unwrap();
    assert_eq!(read(&rd.join("config.txt")).parse::<Config>().unwrap(), resolved);

    for path in [
        rd.join("curve.csv"),
        rd.join("eval.csv"),
        dir.path().join("quadratic/aggregate.csv"),
        dir.path().join("combined.csv"),
        dir.path().join("finals.csv"),
    ] {
        let text = read(&path);
        assert!(
            text.starts_with(&format!("# git: {GIT_DESCRIBE}\n# seed: 7\n")),
            "{}",
            path.display()
        );
        let embedded = embedded_config(&text);
        assert_eq!(embedded.get("system"), Some("pendulum"), "{}", path.display());
        assert_eq!(embedded.get("train.horizon"), Some("60"), "{}", path.display());
        assert!(!strip_header(&text).contains('#'));
    }
    assert_eq!(embedded_config(&read(&rd.join("curve.csv"))), resolved);

    let combined = read(&dir.path().join("combined.csv"));
    let rows: Vec<&str> = strip_header(&combined).lines().collect();
    assert_eq!(rows[0], "step,mean_error,variance,runs,reward_kind");
    assert_eq!(rows.len(), 1 + agg.steps.len());
    assert!(rows[1..].iter().all(|r| r.ends_with(",0,1,quadratic")));

    let manifest: Config = read(&dir.path().join("manifest.txt")).parse().unwrap();
    assert_eq!(manifest.get("runs.failed"), Some("0"));
    assert_eq!(manifest.get("git"), Some(GIT_DESCRIBE));
    assert!(manifest.get("run.quadratic.7").unwrap().starts_with("ok "));
}

#[test]
fn failing_run_is_recorded_and_excluded() {
    let dir = tempfile::tempdir().unwrap();
    // Overflowing weights make the quadratic reward infinite; the other reward ignores them.
    let plan = tiny_plan("plan.rewards=quadratic,maxle\nplan.seeds=2\nreward.weights=1e308,1e308\nreward.horizon=10");
    let res = run_comparison_in(&plan, dir.path(), None).unwrap();
    assert_eq!(res.failed(), 2);
    assert!(res.runs_for(RewardKind::Quadratic).all(|r| r.result.is_err()));
    assert!(res.runs_for(RewardKind::MaxLe).all(|r| r.result.is_ok()));
    assert!(res.rewards[0].aggregate.is_none());
    assert_eq!(res.rewards[0].failed, 2);
    assert_eq!(res.rewards[1].aggregate.as_ref().unwrap().seeds, vec![0, 1]);

    let err = read(&dir.path().join("quadratic/seed-0/error.txt"));
    assert!(err.contains("non-finite"), "{err}");
    assert!(dir.path().join("quadratic/seed-0/config.txt").is_file());
    let manifest: Config = read(&dir.path().join("manifest.txt")).parse().unwrap();
    assert_eq!(manifest.get("runs.failed"), Some("2"));
    assert!(manifest.get("run.quadratic.1").unwrap().starts_with("failed: "));
    assert!(manifest.get("aggregate.quadratic").unwrap().contains("2 failed"));
    let finals = read(&dir.path().join("finals.csv"));
    assert!(strip_header(&finals).contains("quadratic,0,failed,"));
    assert!(!dir.path().join("quadratic/aggregate.csv").exists());
}

fn csv_files(root: &Path) -> Vec<(PathBuf, String)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), read(&p)));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn repeated_comparison_is_byte_identical() {
    let root = tempfile::tempdir().unwrap();
    let mut plan = tiny_plan("plan.rewards=suple,sparse\nplan.seeds=2\nplan.jobs=2\nreward.horizon=10");
    plan.output = root.path().to_path_buf();
    let a = run_comparison(&plan, None).unwrap();
    let b = run_comparison(&plan, None).unwrap();
    assert_ne!(a.dir, b.dir);
    assert!(a.dir.file_name().unwrap().to_str().unwrap().starts_with("tiny-"));
    let (fa, fb) = (csv_files(&a.dir), csv_files(&b.dir));
    assert_eq!(fa.len(), 2 * 2 * 2 + 2 + 2);
    assert_eq!(fa, fb);
    for seed in 0..2 {
        let rel = format!("suple/seed-{seed}/checkpoint.bin");
        assert_eq!(
            std::fs::read(a.dir.join(&rel)).unwrap(),
            std::fs::read(b.dir.join(&rel)).unwrap()
        );
    }
}
