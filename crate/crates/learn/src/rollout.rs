//! Episode collection and deterministic evaluation.

use crate::error::Result;
use rand_chacha::ChaCha8Rng;
use suple_core::env::initial_state;
use suple_core::rewards::label_trajectory;
use suple_core::{
    ControlInput, Error as CoreError, FeedbackPolicy, ResetMode, RewardSpec, Scalar, StateVector, SystemModel,
    Trajectory, TrajectoryMeta, Transition,
};

/// Runs up to `horizon` steps of `policy` from a reset and labels the
/// rewards. The episode ends early, with its last transition marked done,
/// if the dynamics or a reward spectrum blow up. `start` overrides the rest
/// state for fixed starts. `spectrum_policy` is only consulted by
/// policy-controlled intrinsic rewards.
#[allow(clippy::too_many_arguments)]
pub fn collect_rollout<F: Scalar>(
    system: &SystemModel<F>,
    reward: &RewardSpec<F>,
    policy: &mut dyn FnMut(&[F], &mut ChaCha8Rng) -> Vec<F>,
    horizon: usize,
    reset_mode: ResetMode,
    start: Option<&StateVector<F>>,
    rng: &mut ChaCha8Rng,
    meta: TrajectoryMeta,
    spectrum_policy: Option<FeedbackPolicy<'_, F>>,
) -> Result<Trajectory<F>> {
    let mut state = match (reset_mode, start) {
        (ResetMode::FixedStart, Some(s)) => s.clone(),
        _ => initial_state(system, reset_mode, rng),
    };
    system.check_state(&state)?;
    let mut traj = Trajectory::new(TrajectoryMeta { reset_mode, ..meta });
    for _ in 0..horizon {
        let action: ControlInput<F> = system.clamp_action(&policy(&state, rng));
        match system.step(&state, &action) {
            Ok(next) => {
                traj.transitions.push(Transition {
                    state: std::mem::replace(&mut state, next.clone()),
                    action,
                    reward: F::zero(),
                    next_state: next,
                    done: false,
                });
            }
            Err(CoreError::NonFiniteState(_) | CoreError::SingularMassMatrix(_)) => {
                if let Some(last) = traj.transitions.last_mut() {
                    last.done = true;
                }
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    match label_trajectory(&mut traj, reward, system, spectrum_policy) {
        Ok(()) | Err(CoreError::TrajectoryBlowUp { .. }) | Err(CoreError::DegenerateFrame { .. }) => Ok(traj),
        Err(e) => Err(e.into()),
    }
}

/// Per-step evaluation error across episodes.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalCurve<F> {
    pub episodes: usize,
    /// Mean over episodes of the wrapped angle error norm after each step.
    pub mean: Vec<F>,
    /// Unbiased variance across episodes (zero for a single episode).
    pub variance: Vec<F>,
    /// Per angular coordinate, mean absolute wrapped error after each step.
    pub per_angle: Vec<Vec<F>>,
    /// Each episode's mean error over its final [`FINAL_WINDOW`] steps.
    pub final_by_episode: Vec<F>,
}

/// Number of final steps summarized by [`EvalCurve::final_mean`].
pub const FINAL_WINDOW: usize = 50;

fn tail<F: Scalar>(v: &[F], window: usize) -> &[F] {
    &v[v.len().saturating_sub(window)..]
}

impl<F: Scalar> EvalCurve<F> {
    /// Mean error over the final `window` steps.
    pub fn final_mean(&self, window: usize) -> F {
        let t = tail(&self.mean, window);
        t.iter().copied().sum::<F>() / F::from_usize_lossy(t.len().max(1))
    }

    /// Largest mean error over the final `window` steps.
    pub fn final_max(&self, window: usize) -> F {
        tail(&self.mean, window).iter().copied().fold(F::zero(), F::max)
    }

    /// Final-window mean of each angular coordinate's error.
    pub fn final_per_angle(&self, window: usize) -> Vec<F> {
        self.per_angle
            .iter()
            .map(|c| {
                let t = tail(c, window);
                t.iter().copied().sum::<F>() / F::from_usize_lossy(t.len().max(1))
            })
            .collect()
    }
}

/// Wrapped angle errors of `s` with respect to the goal, one per angular coordinate.
pub fn angle_errors<F: Scalar>(system: &SystemModel<F>, s: &[F]) -> Vec<F> {
    s.iter()
        .zip(system.goal().iter())
        .zip(system.angular_mask())
        .filter(|(_, &ang)| ang)
        .map(|((&x, &g), _)| suple_core::scalar::wrap_angle(x - g).abs())
        .collect()
}

/// Runs `episodes` episodes of `policy` from the rest state (or `start`)
/// and records the goal error after every step.
pub fn evaluate<F: Scalar>(
    policy: &dyn Fn(&[F]) -> Vec<F>,
    system: &SystemModel<F>,
    episodes: usize,
    horizon: usize,
    start: Option<&StateVector<F>>,
) -> Result<EvalCurve<F>> {
    let n_ang = system.angular_mask().iter().filter(|&&a| a).count();
    let mut errors = vec![vec![F::zero(); horizon]; episodes];
    let mut per_angle = vec![vec![F::zero(); horizon]; n_ang];
    for run in errors.iter_mut() {
        let mut s = start.cloned().unwrap_or_else(|| system.rest_state().clone());
        for (t, slot) in run.iter_mut().enumerate() {
            s = system.step(&s, &policy(&s))?;
            let e = angle_errors(system, &s);
            *slot = e.iter().map(|&x| x * x).sum::<F>().sqrt();
            for (acc, x) in per_angle.iter_mut().zip(e) {
                acc[t] += x;
            }
        }
    }
    let k = F::from_usize_lossy(episodes.max(1));
    let mut mean = vec![F::zero(); horizon];
    let mut variance = vec![F::zero(); horizon];
    for t in 0..horizon {
        let m = errors.iter().map(|e| e[t]).sum::<F>() / k;
        mean[t] = m;
        if episodes > 1 {
            variance[t] = errors.iter().map(|e| (e[t] - m) * (e[t] - m)).sum::<F>() / F::from_usize_lossy(episodes - 1);
        }
    }
    for c in &mut per_angle {
        for v in c.iter_mut() {
            *v /= k;
        }
    }
    let final_by_episode = errors
        .iter()
        .map(|e| {
            let t = tail(e, FINAL_WINDOW);
            t.iter().copied().sum::<F>() / F::from_usize_lossy(t.len().max(1))
        })
        .collect();
    Ok(EvalCurve {
        episodes,
        mean,
        variance,
        per_angle,
        final_by_episode,
    })
}
