//! Reset/step environment over a system and a reward, the surface that
//! foreign-language bindings wrap.

use crate::dynamics::{StateVector, SystemModel};
use crate::error::{Error, Result};
use crate::lyapunov::{truncated_spectrum, ControlSource, SpectrumControl, TruncatedSpectrum};
use crate::rewards::RewardSpec;
use crate::scalar::Scalar;
use crate::trajectory::ResetMode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Initial state for an episode: the rest state, or a uniform draw from the
/// system's reset box.
pub fn initial_state<F: Scalar, R: Rng + ?Sized>(
    system: &SystemModel<F>,
    mode: ResetMode,
    rng: &mut R,
) -> StateVector<F> {
    match mode {
        ResetMode::FixedStart => system.rest_state().clone(),
        ResetMode::RandomStart => StateVector(
            system
                .reset_ranges()
                .into_iter()
                .map(|(lo, hi)| {
                    let u: f64 = rng.random();
                    lo + (hi - lo) * F::lit(u)
                })
                .collect(),
        ),
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepInfo<F> {
    /// Spectrum behind an intrinsic reward.
    pub spectrum: Option<TruncatedSpectrum<F>>,
    pub action_clamped: bool,
    pub diagnostic: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome<F> {
    pub observation: StateVector<F>,
    pub reward: F,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo<F>,
}

pub struct Environment<F> {
    system: SystemModel<F>,
    reward: RewardSpec<F>,
    reset_mode: ResetMode,
    max_steps: usize,
    state: StateVector<F>,
    steps: usize,
    rng: ChaCha8Rng,
}

impl<F: Scalar> Environment<F> {
    pub fn new(system: SystemModel<F>, reward: RewardSpec<F>, reset_mode: ResetMode, max_steps: usize) -> Result<Self> {
        reward.validate(&system)?;
        if reward.intrinsic().is_some_and(|i| i.control == SpectrumControl::Policy) {
            return Err(Error::RewardSpec(
                "an environment cannot evaluate policy-controlled spectra".into(),
            ));
        }
        let state = system.rest_state().clone();
        Ok(Self {
            system,
            reward,
            reset_mode,
            max_steps,
            state,
            steps: 0,
            rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    pub fn system(&self) -> &SystemModel<F> {
        &self.system
    }

    pub fn reward_spec(&self) -> &RewardSpec<F> {
        &self.reward
    }

    pub fn state(&self) -> &StateVector<F> {
        &self.state
    }

    /// Starts an episode. A seed reseeds the reset sampler; fixed starts ignore it.
    pub fn reset(&mut self, seed: Option<u64>) -> StateVector<F> {
        if let Some(seed) = seed {
            self.rng = ChaCha8Rng::seed_from_u64(seed);
        }
        self.state = initial_state(&self.system, self.reset_mode, &mut self.rng);
        self.steps = 0;
        self.state.clone()
    }

    /// Reward of taking `action` in `state`; the reward depends on the
    /// pre-step state, matching trajectory labelling.
    pub fn reward_at(&self, state: &[F], action: &[F]) -> Result<(F, Option<TruncatedSpectrum<F>>)> {
        match self.reward.intrinsic() {
            None => Ok((self.reward.from_state(state).expect("extrinsic"), None)),
            Some(intr) => {
                let control = match intr.control {
                    SpectrumControl::Held => ControlSource::Held(self.system.clamp_action(action)),
                    _ => ControlSource::Zero,
                };
                let sp = truncated_spectrum(&self.system, state, &intr.settings(), &control)?;
                Ok((self.reward.from_spectrum(&sp).expect("intrinsic"), Some(sp)))
            }
        }
    }

    pub fn step(&mut self, action: &[F]) -> Result<StepOutcome<F>> {
        if action.len() != self.system.action_dim() {
            return Err(Error::Dimension {
                what: "action",
                expected: self.system.action_dim(),
                got: action.len(),
            });
        }
        let clamped = self.system.clamp_action(action);
        let action_clamped = clamped.0 != action;
        let mut info = StepInfo {
            action_clamped,
            ..StepInfo::default()
        };
        let reward = match self.reward_at(&self.state, &clamped) {
            Ok((r, sp)) => {
                info.spectrum = sp;
                r
            }
            Err(e) => {
                info.diagnostic = Some(e.to_string());
                return Ok(StepOutcome {
                    observation: self.state.clone(),
                    reward: F::zero(),
                    terminated: true,
                    truncated: false,
                    info,
                });
            }
        };
        let next = self.system.step(&self.state, &clamped);
        self.steps += 1;
        match next {
            Ok(s) if s.iter().all(|x| x.is_finite()) => {
                self.state = s;
                Ok(StepOutcome {
                    observation: self.state.clone(),
                    reward,
                    terminated: false,
                    truncated: self.steps >= self.max_steps,
                    info,
                })
            }
            other => {
                info.diagnostic = Some(match other {
                    Err(e) => e.to_string(),
                    Ok(_) => Error::TrajectoryBlowUp { step: self.steps }.to_string(),
                });
                Ok(StepOutcome {
                    observation: self.state.clone(),
                    reward,
                    terminated: true,
                    truncated: false,
                    info,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{make_system, Overrides};
    use crate::rewards::RewardKind;

    fn env(kind: RewardKind, mode: ResetMode) -> Environment<f64> {
        let sys = make_system("pendulum", &Overrides::new()).unwrap();
        let spec = RewardSpec::default_for(kind, &sys);
        Environment::new(sys, spec, mode, 100).unwrap()
    }

    #[test]
    fn fixed_start_ignores_seed() {
        let mut e = env(RewardKind::Quadratic, ResetMode::FixedStart);
        assert_eq!(e.reset(Some(3)).0, vec![0.0, 0.0]);
        assert_eq!(e.reset(None).0, vec![0.0, 0.0]);
    }

    #[test]
    fn random_start_is_seeded() {
        let mut e = env(RewardKind::Quadratic, ResetMode::RandomStart);
        let a = e.reset(Some(11));
        let b = e.reset(Some(11));
        let c = e.reset(Some(12));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a[1].abs() <= 8.0);
    }

    #[test]
    fn zero_action_at_rest_keeps_observation() {
        let mut e = env(RewardKind::Suple, ResetMode::FixedStart);
        let obs = e.reset(None);
        let out = e.step(&[0.0]).unwrap();
        assert_eq!(out.observation, obs);
        let sp = out.info.spectrum.unwrap();
        assert!(sp.exponents.windows(2).all(|w| w[0] >= w[1]));
        assert!(!out.info.action_clamped);
        let out = e.step(&[3.0]).unwrap();
        assert!(out.info.action_clamped);
    }

    #[test]
    fn truncates_at_max_steps() {
        let mut e = env(RewardKind::Sparse, ResetMode::FixedStart);
        e.reset(None);
        let mut last = None;
        for _ in 0..100 {
            last = Some(e.step(&[0.0]).unwrap());
        }
        assert!(last.unwrap().truncated);
    }
}
