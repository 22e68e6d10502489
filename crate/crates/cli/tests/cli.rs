use std::path::Path;
use std::process::{Command, Output};

fn suple(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_suple"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SUPLE_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{out}"))
        .parse()
        .unwrap()
}

const TINY: &[&str] = &[
    "--set",
    "pendulum.dt=0.05",
    "--set",
    "train.hidden=8,8",
    "--set",
    "train.horizon=50",
    "--set",
    "train.warmup_steps=50",
    "--set",
    "train.batch_size=16",
    "--set",
    "train.eval_every=100",
    "--set",
    "train.eval_episodes=2",
    "--steps",
    "200",
];

#[test]
fn spectrum_upright_and_hanging() {
    let dir = tempfile::tempdir().unwrap();
    let o = suple(
        &["spectrum", "--system", "pendulum", "--state", "3.14159,0", "--T", "200"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# resolved config\n"), "{out}");
    assert!(out.contains("\nspectrum.horizon=200\n") && out.contains("\npendulum.gravity=9.81\n"));
    let w = 9.81f64.sqrt();
    let closed = ((2.0 * w).cosh().powi(2) + (w * (2.0 * w).sinh()).powi(2))
        .sqrt()
        .log2()
        / 2.0;
    let l1 = value(&out, "lambda_1");
    assert!((l1 - closed).abs() / closed < 1e-3, "{l1} vs {closed}");
    assert_eq!(value(&out, "suple"), l1);
    assert_eq!(value(&out, "maxle"), l1);
    assert!(out
        .lines()
        .any(|l| l.starts_with("lambda_1 = ") && l.split('.').nth(1).unwrap().len() == 6));

    let o = suple(
        &["spectrum", "--state", "3.141592653589793,0", "--T", "1000"],
        dir.path(),
    );
    let l1 = value(&stdout(&o), "lambda_1");
    assert!(
        (l1 - w * std::f64::consts::LOG2_E).abs() / (w * std::f64::consts::LOG2_E) < 0.05,
        "{l1}"
    );

    let o = suple(&["spectrum", "--state", "0,0", "--T", "1000"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(value(&stdout(&o), "lambda_1").abs() < 0.05);
}

#[test]
fn spectrum_usage_and_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = suple(&["spectrum", "--state", "3.14x,0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--state"), "{}", stderr(&o));

    let o = suple(&["spectrum", "--state", "1,2,3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dimension mismatch"));

    let o = suple(&["spectrum"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = suple(
        &[
            "spectrum",
            "--system",
            "lorenz",
            "--state",
            "1e200,1e200,1e200",
            "--T",
            "50",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(
        stderr(&o).contains("non-finite") || stderr(&o).contains("blow-up"),
        "{}",
        stderr(&o)
    );

    assert_eq!(suple(&["spectrum", "--frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(suple(&["levitate"], dir.path()).status.code(), Some(2));
    assert_eq!(
        suple(&["spectrum", "--set", "novalue", "--state", "0,0"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        suple(&["spectrum", "--config", "missing.cfg"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["spectrum", "landscape", "train", "eval", "compare"] {
        let o = suple(&[sub, "--help"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(stdout(&o).contains("--seed"), "{sub}");
    }
    assert_eq!(suple(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn config_file_then_overrides_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.cfg"),
        "system=pendulum\npendulum.gravity=4\nspectrum.state=0,0\nspectrum.horizon=10\n",
    )
    .unwrap();
    let o = suple(
        &[
            "spectrum",
            "--config",
            "c.cfg",
            "--set",
            "pendulum.gravity=5",
            "--set",
            "spectrum.horizon=30",
            "--T",
            "20",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("\npendulum.gravity=5\n"));
    assert!(out.contains("\nspectrum.horizon=20\n"));
    assert!(out.contains("\nspectrum.state=0,0\n"));
}

#[test]
fn landscape_writes_csv_and_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let o = suple(
        &[
            "landscape",
            "--system",
            "pendulum",
            "--axes",
            "0,1",
            "--res",
            "21",
            "--out",
            "land",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("landscape.resolution=21"));
    let csv = std::fs::read_to_string(dir.path().join("land/landscape-pendulum-suple-0-1.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 21 * 21);
    let ppm = std::fs::read(dir.path().join("land/landscape-pendulum-suple-0-1.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n21 21\n255\n"));
    assert_eq!(ppm.len(), b"P6\n21 21\n255\n".len() + 21 * 21 * 3);

    let o = suple(&["landscape", "--reward", "quadratic", "--res", "5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = suple(&["landscape", "--axes", "0,7", "--res", "5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn train_is_reproducible_and_eval_replays_it() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let mut args = vec!["train", "--reward", "quadratic", "--seed", "3", "--out", out];
        args.extend_from_slice(TINY);
        let o = suple(&args, dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("\ntrain.total_steps=200\n"));
        dir.path().join(out).join("train-pendulum-quadratic-seed-3")
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["curve.csv", "eval.csv", "config.txt", "checkpoint.bin"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let curve = std::fs::read_to_string(a.join("curve.csv")).unwrap();
    assert!(curve.starts_with("# git: "));
    assert!(curve.contains("# seed: 3\n"));

    let ckpt = a.join("checkpoint.bin");
    let o = suple(
        &["eval", "--checkpoint", ckpt.to_str().unwrap(), "--out", "replay.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!stderr(&o).contains("warning"));
    assert_eq!(
        std::fs::read(dir.path().join("replay.csv")).unwrap(),
        std::fs::read(a.join("eval.csv")).unwrap()
    );
    assert!(value(&stdout(&o), "final_mean_error") >= 0.0);

    let o = suple(
        &[
            "eval",
            "--checkpoint",
            ckpt.to_str().unwrap(),
            "--set",
            "system=double_pendulum",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.path().join("junk.bin"), b"not a checkpoint").unwrap();
    let o = suple(&["eval", "--checkpoint", "junk.bin"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn train_rejects_unknown_settings() {
    let dir = tempfile::tempdir().unwrap();
    let o = suple(&["train", "--set", "train.colour=blue"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = suple(&["train", "--reward", "curiosity"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_writes_tree_under_default_root() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("mini"),
        "plan.rewards=suple,sparse\nplan.seeds=2\nreward.horizon=10\npendulum.dt=0.05\ntrain.hidden=8,8\n\
         train.horizon=50\ntrain.warmup_steps=50\ntrain.batch_size=16\ntrain.eval_every=100\n\
         train.eval_episodes=2\ntrain.total_steps=100\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_suple"))
        .args(["compare", "--plan", "mini", "--seed", "4"])
        .current_dir(dir.path())
        .env("SUPLE_OUT", "out-root")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("plan.seed_base=4"));
    assert!(out.contains("plan.name=mini"));
    let runs: Vec<_> = std::fs::read_dir(dir.path().join("out-root")).unwrap().collect();
    assert_eq!(runs.len(), 1);
    let root = runs[0].as_ref().unwrap().path();
    assert!(root.file_name().unwrap().to_str().unwrap().starts_with("mini-"));
    for f in [
        "manifest.txt",
        "combined.csv",
        "finals.csv",
        "suple/seed-4/curve.csv",
        "sparse/seed-5/eval.csv",
    ] {
        assert!(root.join(f).is_file(), "{f}");
    }
    assert!(out.contains("suple") && out.contains("sparse"));

    let o = suple(&["compare", "--plan", "absent"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(suple(&["compare"], dir.path()).status.code(), Some(2));
}
