//! Intrinsic (Lyapunov) and extrinsic (goal-based) rewards.

use crate::config::Config;
use crate::dynamics::{ControlInput, StateVector, SystemKind, SystemModel};
use crate::error::{Error, Result};
use crate::lyapunov::{
    spectrum_batch, ControlSource, FeedbackPolicy, SpectrumControl, SpectrumSettings, TruncatedSpectrum,
};
use crate::scalar::{wrap_angle, Scalar};
use crate::trajectory::Trajectory;
use std::fmt;
use std::str::FromStr;

/// Default spectrum horizon in steps (0.4 s at the default `dt`).
pub const DEFAULT_HORIZON: usize = 40;
/// Double-pendulum horizon. Shorter windows are dominated by the shear of
/// the hanging oscillation rather than by the upright instability.
pub const DOUBLE_PENDULUM_HORIZON: usize = 100;
/// Default squared-error radius of the sparse reward.
pub const DEFAULT_SPARSE_RADIUS: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RewardKind {
    Suple,
    MaxLe,
    Quadratic,
    Sparse,
}

impl RewardKind {
    pub const ALL: [RewardKind; 4] = [
        RewardKind::Suple,
        RewardKind::MaxLe,
        RewardKind::Quadratic,
        RewardKind::Sparse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RewardKind::Suple => "suple",
            RewardKind::MaxLe => "maxle",
            RewardKind::Quadratic => "quadratic",
            RewardKind::Sparse => "sparse",
        }
    }

    pub fn is_intrinsic(self) -> bool {
        matches!(self, RewardKind::Suple | RewardKind::MaxLe)
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RewardKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RewardKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::RewardSpec(format!("unknown reward kind `{s}`")))
    }
}

/// Settings shared by the Lyapunov rewards. Deliberately has no goal.
#[derive(Clone, Debug, PartialEq)]
pub struct IntrinsicReward {
    pub horizon: usize,
    pub stride: usize,
    pub control: SpectrumControl,
}

impl Default for IntrinsicReward {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            stride: 1,
            control: SpectrumControl::Zero,
        }
    }
}

/// Spectrum horizon used when none is configured.
pub fn default_horizon(kind: SystemKind) -> usize {
    match kind {
        SystemKind::DoublePendulum => DOUBLE_PENDULUM_HORIZON,
        _ => DEFAULT_HORIZON,
    }
}

impl IntrinsicReward {
    pub fn for_system(kind: SystemKind) -> Self {
        Self {
            horizon: default_horizon(kind),
            ..Self::default()
        }
    }

    pub fn settings(&self) -> SpectrumSettings {
        SpectrumSettings::new(self.horizon).with_stride(self.stride)
    }
}

/// `-sum_i w_i (g_i - s_i)^2` with angular differences wrapped.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticReward<F> {
    pub weights: Vec<F>,
    pub goal: StateVector<F>,
    pub angular: Vec<bool>,
}

/// `1` inside the open squared-error ball of `radius` around the goal.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseReward<F> {
    pub radius: F,
    pub goal: StateVector<F>,
    pub angular: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RewardSpec<F> {
    Suple(IntrinsicReward),
    MaxLe(IntrinsicReward),
    Quadratic(QuadraticReward<F>),
    Sparse(SparseReward<F>),
}

/// Sum of the strictly positive exponents; zero if there are none.
pub fn suple<F: Scalar>(spectrum: &TruncatedSpectrum<F>) -> F {
    spectrum.exponents.iter().copied().filter(|&l| l > F::zero()).sum()
}

/// Largest exponent, clamped below at zero.
pub fn maxle<F: Scalar>(spectrum: &TruncatedSpectrum<F>) -> F {
    spectrum
        .exponents
        .iter()
        .copied()
        .fold(F::zero(), |m, l| if l > m { l } else { m })
}

fn goal_errors<'a, F: Scalar>(s: &'a [F], goal: &'a [F], angular: &'a [bool]) -> impl Iterator<Item = F> + 'a {
    s.iter().zip(goal).zip(angular).map(|((&x, &g), &ang)| {
        let d = g - x;
        if ang {
            wrap_angle(d)
        } else {
            d
        }
    })
}

pub fn quadratic<F: Scalar>(s: &[F], spec: &QuadraticReward<F>) -> F {
    -goal_errors(s, &spec.goal, &spec.angular)
        .zip(&spec.weights)
        .map(|(d, &w)| w * d * d)
        .sum::<F>()
}

pub fn sparse<F: Scalar>(s: &[F], spec: &SparseReward<F>) -> F {
    let sq: F = goal_errors(s, &spec.goal, &spec.angular).map(|d| d * d).sum();
    if sq < spec.radius {
        F::one()
    } else {
        F::zero()
    }
}

/// Conventional weights: 1 on angles, 0.1 on velocities, 0.01 on positions.
/// Velocities are the odd entries of the interleaved state layout.
pub fn default_weights<F: Scalar>(system: &SystemModel<F>) -> Vec<F> {
    system
        .angular_mask()
        .iter()
        .enumerate()
        .map(|(i, &ang)| {
            if ang {
                F::one()
            } else if i % 2 == 1 {
                F::lit(0.1)
            } else {
                F::lit(0.01)
            }
        })
        .collect()
}

impl<F: Scalar> RewardSpec<F> {
    /// Builds a spec of `kind` with the documented defaults for `system`.
    pub fn default_for(kind: RewardKind, system: &SystemModel<F>) -> Self {
        match kind {
            RewardKind::Suple => RewardSpec::Suple(IntrinsicReward::for_system(system.kind())),
            RewardKind::MaxLe => RewardSpec::MaxLe(IntrinsicReward::for_system(system.kind())),
            RewardKind::Quadratic => RewardSpec::Quadratic(QuadraticReward {
                weights: default_weights(system),
                goal: system.goal().clone(),
                angular: system.angular_mask().to_vec(),
            }),
            RewardKind::Sparse => RewardSpec::Sparse(SparseReward {
                radius: F::lit(DEFAULT_SPARSE_RADIUS),
                goal: system.goal().clone(),
                angular: system.angular_mask().to_vec(),
            }),
        }
    }

    pub fn kind(&self) -> RewardKind {
        match self {
            RewardSpec::Suple(_) => RewardKind::Suple,
            RewardSpec::MaxLe(_) => RewardKind::MaxLe,
            RewardSpec::Quadratic(_) => RewardKind::Quadratic,
            RewardSpec::Sparse(_) => RewardKind::Sparse,
        }
    }

    pub fn intrinsic(&self) -> Option<&IntrinsicReward> {
        match self {
            RewardSpec::Suple(i) | RewardSpec::MaxLe(i) => Some(i),
            _ => None,
        }
    }

    /// Checks the spec against a system's dimensions.
    pub fn validate(&self, system: &SystemModel<F>) -> Result<()> {
        let n = system.state_dim();
        let check_len = |what: &'static str, got: usize| {
            if got != n {
                Err(Error::Dimension { what, expected: n, got })
            } else {
                Ok(())
            }
        };
        match self {
            RewardSpec::Suple(i) | RewardSpec::MaxLe(i) => {
                if i.horizon == 0 || i.stride == 0 {
                    return Err(Error::RewardSpec("horizon and stride must be at least 1".into()));
                }
            }
            RewardSpec::Quadratic(q) => {
                check_len("quadratic weights", q.weights.len())?;
                check_len("reward goal", q.goal.len())?;
                check_len("angular mask", q.angular.len())?;
                if q.weights.iter().any(|&w| !(w >= F::zero())) {
                    return Err(Error::RewardSpec("quadratic weights must be non-negative".into()));
                }
            }
            RewardSpec::Sparse(sp) => {
                check_len("reward goal", sp.goal.len())?;
                check_len("angular mask", sp.angular.len())?;
                if !(sp.radius > F::zero()) {
                    return Err(Error::RewardSpec("sparse radius must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Reward of a single state under an extrinsic spec, or of a spectrum
    /// under an intrinsic one.
    pub fn from_spectrum(&self, spectrum: &TruncatedSpectrum<F>) -> Option<F> {
        match self {
            RewardSpec::Suple(_) => Some(suple(spectrum)),
            RewardSpec::MaxLe(_) => Some(maxle(spectrum)),
            _ => None,
        }
    }

    pub fn from_state(&self, s: &[F]) -> Option<F> {
        match self {
            RewardSpec::Quadratic(q) => Some(quadratic(s, q)),
            RewardSpec::Sparse(sp) => Some(sparse(s, sp)),
            _ => None,
        }
    }

    /// Writes the fully-resolved spec under `reward.*` keys.
    pub fn write_config(&self, cfg: &mut Config) {
        cfg.set("reward.kind", self.kind().as_str());
        match self {
            RewardSpec::Suple(i) | RewardSpec::MaxLe(i) => {
                cfg.set("reward.horizon", i.horizon);
                cfg.set("reward.stride", i.stride);
                cfg.set("reward.control", i.control.as_str());
            }
            RewardSpec::Quadratic(q) => {
                cfg.set("reward.weights", join(&q.weights));
                cfg.set("reward.goal", join(&q.goal));
                cfg.set("reward.angular", join_mask(&q.angular));
            }
            RewardSpec::Sparse(sp) => {
                cfg.set("reward.radius", sp.radius);
                cfg.set("reward.goal", join(&sp.goal));
                cfg.set("reward.angular", join_mask(&sp.angular));
            }
        }
    }

    /// Reads `reward.*` keys, filling anything absent from the system defaults.
    pub fn from_config(cfg: &Config, system: &SystemModel<F>) -> Result<Self> {
        let kind: RewardKind = cfg.get("reward.kind").unwrap_or("suple").parse()?;
        let mut spec = Self::default_for(kind, system);
        match &mut spec {
            RewardSpec::Suple(i) | RewardSpec::MaxLe(i) => {
                if let Some(h) = cfg.value::<usize>("reward.horizon")? {
                    i.horizon = h;
                }
                if let Some(s) = cfg.value::<usize>("reward.stride")? {
                    i.stride = s;
                }
                if let Some(c) = cfg.get("reward.control") {
                    i.control = c.parse()?;
                }
            }
            RewardSpec::Quadratic(q) => {
                if let Some(w) = cfg.get("reward.weights") {
                    q.weights = parse_list(w)?;
                }
                if let Some(g) = cfg.get("reward.goal") {
                    q.goal = StateVector(parse_list(g)?);
                }
                if let Some(a) = cfg.get("reward.angular") {
                    q.angular = parse_mask(a)?;
                }
            }
            RewardSpec::Sparse(sp) => {
                if let Some(r) = cfg.value::<f64>("reward.radius")? {
                    sp.radius = F::lit(r);
                }
                if let Some(g) = cfg.get("reward.goal") {
                    sp.goal = StateVector(parse_list(g)?);
                }
                if let Some(a) = cfg.get("reward.angular") {
                    sp.angular = parse_mask(a)?;
                }
            }
        }
        spec.validate(system)?;
        Ok(spec)
    }
}

fn join<F: Scalar>(v: &[F]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn join_mask(v: &[bool]) -> String {
    v.iter()
        .map(|&b| if b { "1" } else { "0" })
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses a comma-separated list of reals.
pub fn parse_list<F: Scalar>(s: &str) -> Result<Vec<F>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map(F::lit)
                .map_err(|_| Error::RewardSpec(format!("not a number: `{t}`")))
        })
        .collect()
}

fn parse_mask(s: &str) -> Result<Vec<bool>> {
    s.split(',')
        .map(|t| match t.trim() {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            other => Err(Error::RewardSpec(format!("not a flag: `{other}`"))),
        })
        .collect()
}

/// Fills in the reward of every transition from the state at that step.
///
/// Intrinsic kinds evaluate the truncated spectrum at each visited state in
/// one batch. `policy` is consulted only when the spec asks for
/// policy-controlled spectra. If a spectrum blows up, that step is marked
/// terminal, later steps are dropped and the error is returned.
pub fn label_trajectory<F: Scalar>(
    traj: &mut Trajectory<F>,
    spec: &RewardSpec<F>,
    system: &SystemModel<F>,
    policy: Option<FeedbackPolicy<'_, F>>,
) -> Result<()> {
    for tr in &traj.transitions {
        system.check_state(&tr.state)?;
    }
    let Some(intr) = spec.intrinsic() else {
        for tr in &mut traj.transitions {
            tr.reward = spec.from_state(&tr.state).expect("extrinsic spec");
        }
        return Ok(());
    };

    let states = traj.states();
    let settings = intr.settings();
    let spectra: Vec<Result<TruncatedSpectrum<F>>> = match intr.control {
        SpectrumControl::Zero => spectrum_batch(system, &states, &settings, &ControlSource::Zero, false),
        SpectrumControl::Policy => {
            let pi = policy.ok_or_else(|| Error::RewardSpec("policy-controlled spectra need a policy".into()))?;
            spectrum_batch(system, &states, &settings, &ControlSource::Policy(pi), false)
        }
        SpectrumControl::Held => traj
            .transitions
            .iter()
            .map(|tr| {
                let held: ControlInput<F> = tr.action.clone();
                crate::lyapunov::truncated_spectrum(system, &tr.state, &settings, &ControlSource::Held(held))
            })
            .collect(),
    };

    for (t, result) in spectra.into_iter().enumerate() {
        match result {
            Ok(spectrum) => {
                traj.transitions[t].reward = spec.from_spectrum(&spectrum).expect("intrinsic spec");
            }
            Err(e) => {
                traj.transitions[t].reward = F::zero();
                traj.transitions[t].done = true;
                traj.transitions.truncate(t + 1);
                return Err(e);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{make_system, Overrides};
    use crate::trajectory::{TrajectoryMeta, Transition};
    use std::f64::consts::PI;

    fn spectrum(v: &[f64]) -> TruncatedSpectrum<f64> {
        TruncatedSpectrum::from_exponents(v.to_vec(), 1, 0.01, StateVector(vec![0.0; v.len()]))
    }

    fn pendulum() -> SystemModel<f64> {
        make_system("pendulum", &Overrides::new()).unwrap()
    }

    #[test]
    fn suple_and_maxle_examples() {
        assert!((suple(&spectrum(&[1.2, 0.3, -0.5])) - 1.5).abs() < 1e-15);
        assert_eq!(suple(&spectrum(&[-0.1, -2.0])), 0.0);
        assert_eq!(maxle(&spectrum(&[1.2, 0.3, -0.5])), 1.2);
        assert_eq!(maxle(&spectrum(&[-0.1, -2.0])), 0.0);
        let one = spectrum(&[0.7, -0.2]);
        assert_eq!(maxle(&one), suple(&one));
    }

    #[test]
    fn quadratic_examples() {
        let p = pendulum();
        let mut q = match RewardSpec::default_for(RewardKind::Quadratic, &p) {
            RewardSpec::Quadratic(q) => q,
            _ => unreachable!(),
        };
        assert_eq!(q.weights, vec![1.0, 0.1]);
        assert_eq!(quadratic(&[PI, 0.0], &q), 0.0);
        assert!((quadratic(&[0.0, 0.0], &q) + PI * PI).abs() < 1e-12);
        q.weights = vec![1.0, 0.0];
        assert!((quadratic(&[-PI + 0.1, 0.0], &q) + 0.01).abs() < 1e-12);
    }

    #[test]
    fn sparse_examples() {
        let p = pendulum();
        let sp = match RewardSpec::default_for(RewardKind::Sparse, &p) {
            RewardSpec::Sparse(s) => s,
            _ => unreachable!(),
        };
        assert_eq!(sparse(&[PI, 0.0], &sp), 1.0);
        assert_eq!(sparse(&[0.0, 0.0], &sp), 0.0);
        let edge = SparseReward {
            radius: 0.25,
            goal: StateVector(vec![PI, 0.0]),
            angular: vec![true, false],
        };
        // squared error exactly 0.25
        assert_eq!(sparse(&[PI, 0.5], &edge), 0.0);
        assert_eq!(sparse(&[PI, 0.4999], &edge), 1.0);
    }

    #[test]
    fn labelling_extrinsic_and_intrinsic() {
        let p = pendulum();
        let goal = p.goal().clone();
        let tr = Transition {
            state: goal.clone(),
            action: p.zero_action(),
            reward: -1.0,
            next_state: goal.clone(),
            done: false,
        };
        let mut traj = Trajectory {
            transitions: vec![tr.clone(), tr],
            meta: TrajectoryMeta::default(),
        };
        label_trajectory(&mut traj, &RewardSpec::default_for(RewardKind::Sparse, &p), &p, None).unwrap();
        assert_eq!(traj.rewards(), vec![1.0, 1.0]);
        label_trajectory(&mut traj, &RewardSpec::default_for(RewardKind::Quadratic, &p), &p, None).unwrap();
        assert_eq!(traj.rewards(), vec![0.0, 0.0]);

        let spec = RewardSpec::default_for(RewardKind::Suple, &p);
        label_trajectory(&mut traj, &spec, &p, None).unwrap();
        let direct =
            crate::lyapunov::truncated_spectrum(&p, &goal, &SpectrumSettings::new(40), &ControlSource::Zero).unwrap();
        assert_eq!(traj.rewards()[0], suple(&direct));
    }

    #[test]
    fn policy_control_requires_policy() {
        let p = pendulum();
        let spec = RewardSpec::Suple(IntrinsicReward {
            control: SpectrumControl::Policy,
            ..IntrinsicReward::default()
        });
        let mut traj = Trajectory {
            transitions: vec![Transition {
                state: StateVector(vec![0.1, 0.0]),
                action: p.zero_action(),
                reward: 0.0,
                next_state: StateVector(vec![0.1, 0.0]),
                done: false,
            }],
            meta: TrajectoryMeta::default(),
        };
        assert!(label_trajectory(&mut traj, &spec, &p, None).is_err());
        let zero = |_: &[f64]| vec![0.0];
        label_trajectory(&mut traj, &spec, &p, Some(&zero)).unwrap();
    }

    #[test]
    fn config_round_trip() {
        let p = make_system::<f64>("cartpole", &Overrides::new()).unwrap();
        for kind in RewardKind::ALL {
            let spec = RewardSpec::default_for(kind, &p);
            let mut cfg = Config::default();
            spec.write_config(&mut cfg);
            let back = RewardSpec::from_config(&cfg, &p).unwrap();
            assert_eq!(back, spec, "{kind}");
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let p = pendulum();
        let mut cfg = Config::default();
        cfg.set("reward.kind", "quadratic");
        cfg.set("reward.weights", "1,-1");
        assert!(RewardSpec::from_config(&cfg, &p).is_err());
        cfg.set("reward.weights", "1,1,1");
        assert!(RewardSpec::from_config(&cfg, &p).is_err());
        cfg.set("reward.kind", "sparse");
        cfg.set("reward.radius", "0");
        assert!(RewardSpec::from_config(&cfg, &p).is_err());
        cfg.set("reward.kind", "empowerment");
        assert!(RewardSpec::from_config(&cfg, &p).is_err());
    }
}
