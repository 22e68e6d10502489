use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use suple_core::dynamics::{make_system, Overrides, SystemModel};
use suple_core::{Config, ResetMode, RewardKind, RewardSpec, TrajectoryMeta};
use suple_learn::features::observation_dim;
use suple_learn::{collect_rollout, evaluate, train, Sac, TrainConfig};

const MECHANICAL: [&str; 3] = ["pendulum", "cartpole", "double_pendulum"];

fn system(name: &str) -> SystemModel<f64> {
    make_system(name, &Overrides::new()).unwrap()
}

fn zero_policy(sys: &SystemModel<f64>) -> impl FnMut(&[f64], &mut ChaCha8Rng) -> Vec<f64> {
    let m = sys.action_dim();
    move |_, _| vec![0.0; m]
}

fn tiny_config(reward: RewardKind, seed: u64, total_steps: usize) -> TrainConfig<f64> {
    let sys = make_system("pendulum", &Overrides::from([("dt".to_string(), 0.05)])).unwrap();
    let spec = RewardSpec::default_for(reward, &sys);
    let mut cfg = TrainConfig::new(sys, spec);
    cfg.sac.hidden = vec![8, 8];
    cfg.horizon = 40;
    cfg.total_steps = total_steps;
    cfg.warmup_steps = 40;
    cfg.batch_size = 16;
    cfg.eval_every = 80;
    cfg.eval_episodes = 2;
    cfg.eval_horizon = 60;
    cfg.seed = seed;
    cfg
}

#[test]
fn zero_action_from_rest_stays_at_rest() {
    for name in MECHANICAL {
        let sys = system(name);
        let spec = RewardSpec::default_for(RewardKind::Quadratic, &sys);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let traj = collect_rollout(
            &sys,
            &spec,
            &mut zero_policy(&sys),
            200,
            ResetMode::FixedStart,
            None,
            &mut rng,
            TrajectoryMeta::default(),
            None,
        )
        .unwrap();
        assert_eq!(traj.transitions.len(), 200);
        assert_eq!(traj.meta.reset_mode, ResetMode::FixedStart);
        for t in &traj.transitions {
            if name == "pendulum" {
                assert_eq!(t.next_state, *sys.rest_state());
            }
            // cos(-pi/2) is not exactly zero, so the double pendulum drifts by rounding only.
            let drift = t
                .next_state
                .iter()
                .zip(sys.rest_state().iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(drift < 1e-12, "{name}: {drift:e}");
        }
    }
}

#[test]
fn same_seed_gives_identical_rollouts() {
    for name in MECHANICAL {
        let sys = system(name);
        let spec = RewardSpec::default_for(RewardKind::Suple, &sys);
        let (low, high) = (sys.action_low().to_vec(), sys.action_high().to_vec());
        let run = |seed: u64| {
            let mut policy = |_: &[f64], rng: &mut ChaCha8Rng| -> Vec<f64> {
                low.iter().zip(&high).map(|(&l, &h)| rng.random_range(l..h)).collect()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            collect_rollout(
                &sys,
                &spec,
                &mut policy,
                30,
                ResetMode::RandomStart,
                None,
                &mut rng,
                TrajectoryMeta::default(),
                None,
            )
            .unwrap()
        };
        let (a, b) = (run(9), run(9));
        assert_eq!(a, b, "{name}");
        assert_eq!(a.meta.reset_mode, ResetMode::RandomStart);
        assert_ne!(a, run(10), "{name}");
        for w in a.transitions.windows(2) {
            assert_eq!(w[0].next_state, w[1].state);
        }
    }
}

#[test]
fn sparse_reward_is_zero_outside_the_goal_ball() {
    let sys = system("pendulum");
    let spec = RewardSpec::default_for(RewardKind::Sparse, &sys);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut policy = |_: &[f64], rng: &mut ChaCha8Rng| vec![rng.random_range(-1.0..1.0)];
    let traj = collect_rollout(
        &sys,
        &spec,
        &mut policy,
        300,
        ResetMode::FixedStart,
        None,
        &mut rng,
        TrajectoryMeta::default(),
        None,
    )
    .unwrap();
    assert!(traj.transitions.iter().all(|t| (t.state[0] - PI).abs() > 1.0));
    assert!(traj.rewards().iter().all(|&r| r == 0.0));
}

#[test]
fn holding_the_goal_has_zero_error() {
    let sys = make_system("pendulum", &Overrides::from([("gravity".to_string(), 0.0)])).unwrap();
    let eval = evaluate(&|_: &[f64]| vec![0.0], &sys, 3, 100, Some(sys.goal())).unwrap();
    assert!(eval.mean.iter().all(|&e| e == 0.0));
    assert!(eval.variance.iter().all(|&v| v == 0.0));
    assert_eq!(eval.final_mean(50), 0.0);
}

#[test]
fn unactuated_pendulum_never_approaches_the_goal() {
    let sys = system("pendulum");
    let eval = evaluate(&|_: &[f64]| vec![0.0], &sys, 5, 500, None).unwrap();
    assert!(eval.mean.iter().all(|&e| (e - PI).abs() < 1e-12));
    assert_eq!(eval.final_by_episode.len(), 5);
}

#[test]
fn zero_steps_returns_the_initial_policy() {
    let cfg = tiny_config(RewardKind::Quadratic, 4, 0);
    let out = train(&cfg, None, None).unwrap();
    assert_eq!(out.env_steps, 0);
    assert_eq!(out.curve.len(), 1);
    assert_eq!(out.curve[0].step, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    rng.set_stream(0);
    let fresh = Sac::new(
        observation_dim(&cfg.system),
        cfg.system.action_low().to_vec(),
        cfg.system.action_high().to_vec(),
        cfg.sac.clone(),
        &mut rng,
    );
    assert_eq!(out.agent.actor.net.params(), fresh.actor.net.params());
    assert_eq!(out.agent.critics[0].params(), fresh.critics[0].params());
}

#[test]
fn same_config_and_seed_give_identical_curves() {
    let a = train(&tiny_config(RewardKind::Suple, 2, 240), None, None).unwrap();
    let b = train(&tiny_config(RewardKind::Suple, 2, 240), None, None).unwrap();
    assert_eq!(a.curve, b.curve);
    assert_eq!(a.final_eval, b.final_eval);
    assert_eq!(a.agent.actor.net.params(), b.agent.actor.net.params());
    assert_eq!(a.curve.iter().map(|p| p.step).collect::<Vec<_>>(), vec![80, 160, 240]);
    let c = train(&tiny_config(RewardKind::Suple, 3, 240), None, None).unwrap();
    assert_ne!(a.agent.actor.net.params(), c.agent.actor.net.params());
}

#[test]
fn config_round_trips() {
    let mut cfg = tiny_config(RewardKind::Sparse, 17, 1000);
    cfg.reset_mode = ResetMode::RandomStart;
    cfg.sac.auto_alpha = true;
    let text = cfg.to_config().to_string();
    let back = TrainConfig::<f64>::from_config(&text.parse::<Config>().unwrap()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.to_config().to_string(), text);
}

#[test]
fn invalid_settings_are_rejected() {
    let mut cfg = tiny_config(RewardKind::Suple, 0, 100);
    cfg.sac.gamma = 1.0;
    assert!(train(&cfg, None, None).is_err());
    let mut cfg = tiny_config(RewardKind::Suple, 0, 100);
    cfg.horizon = 0;
    assert!(train(&cfg, None, None).is_err());
    let text = "system=pendulum\ntrain.colour=blue\n";
    assert!(TrainConfig::<f64>::from_config(&text.parse().unwrap()).is_err());
}
