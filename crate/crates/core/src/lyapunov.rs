//! Truncated (finite-horizon, state-dependent) Lyapunov spectra.
//!
//! An orthonormal frame is carried along the trajectory starting at `s0`.
//! Each step every frame vector is pushed through the tangent of the
//! one-step map, the state is advanced, the frame is re-orthogonalized with
//! modified Gram-Schmidt and `log2` of the pre-normalization lengths is
//! accumulated. Dividing by the elapsed time `T * dt` gives exponents in
//! bits per second.

use crate::dynamics::{ControlInput, StateVector, SystemModel};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, Matrix};
use crate::scalar::Scalar;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Below this length a frame vector is treated as numerically collapsed.
pub const DEGENERATE_NORM: f64 = 1e-300;

/// Set of mutually orthogonal unit vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalFrame<F> {
    vectors: Vec<Vec<F>>,
}

impl<F: Scalar> OrthonormalFrame<F> {
    /// The standard basis of `R^n`.
    pub fn standard(n: usize) -> Self {
        Self {
            vectors: Matrix::<F>::identity(n).columns(),
        }
    }

    pub fn vectors(&self) -> &[Vec<F>] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<Vec<F>> {
        self.vectors
    }

    /// Largest `|<v_i, v_j>|` over `i != j` and largest `| |v_i| - 1 |`.
    pub fn orthonormality_defect(&self) -> (F, F) {
        let mut off = F::zero();
        let mut unit = F::zero();
        for (i, vi) in self.vectors.iter().enumerate() {
            unit = unit.max((norm2(vi) - F::one()).abs());
            for vj in &self.vectors[i + 1..] {
                off = off.max(dot(vi, vj).abs());
            }
        }
        (off, unit)
    }
}

/// Modified Gram-Schmidt. Returns the orthonormal frame and, for each input
/// vector, its length after removing the components along the earlier ones
/// but before normalization. The first vector keeps its direction.
pub fn gram_schmidt<F: Scalar>(vectors: &[Vec<F>]) -> Result<(OrthonormalFrame<F>, Vec<F>)> {
    let mut work = vectors.to_vec();
    let norms = gram_schmidt_in_place(&mut work)?;
    Ok((OrthonormalFrame { vectors: work }, norms))
}

fn gram_schmidt_in_place<F: Scalar>(vectors: &mut [Vec<F>]) -> Result<Vec<F>> {
    let floor = F::from_f64(DEGENERATE_NORM).unwrap_or_else(F::min_positive_value);
    let mut norms = Vec::with_capacity(vectors.len());
    for i in 0..vectors.len() {
        let (done, rest) = vectors.split_at_mut(i);
        let v = &mut rest[0];
        for u in done.iter() {
            let proj = dot(u, v);
            axpy(-proj, u, v);
        }
        let norm = norm2(v);
        if !(norm >= floor) {
            return Err(Error::DegenerateFrame {
                index: i,
                norm: norm.to_f64_lossy(),
            });
        }
        let inv = norm.recip();
        v.iter_mut().for_each(|x| *x *= inv);
        norms.push(norm);
    }
    Ok(norms)
}

/// State feedback shared across threads.
pub type FeedbackPolicy<'a, F> = &'a (dyn Fn(&[F]) -> Vec<F> + Sync);

/// Actions applied while the frame is propagated.
pub enum ControlSource<'a, F> {
    /// Zero action at every step.
    Zero,
    /// One action held for the whole horizon.
    Held(ControlInput<F>),
    /// Explicit per-step actions; the last one is repeated if the horizon is longer.
    Sequence(&'a [ControlInput<F>]),
    /// State feedback evaluated along the propagated trajectory.
    Policy(FeedbackPolicy<'a, F>),
}

impl<F: Scalar> ControlSource<'_, F> {
    fn action(&self, system: &SystemModel<F>, t: usize, s: &[F]) -> Vec<F> {
        match self {
            ControlSource::Zero => vec![F::zero(); system.action_dim()],
            ControlSource::Held(a) => a.to_vec(),
            ControlSource::Sequence(seq) => match seq.get(t).or(seq.last()) {
                Some(a) => a.to_vec(),
                None => vec![F::zero(); system.action_dim()],
            },
            ControlSource::Policy(pi) => pi(s),
        }
    }
}

impl<F> fmt::Debug for ControlSource<'_, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlSource::Zero => "Zero",
            ControlSource::Held(_) => "Held",
            ControlSource::Sequence(_) => "Sequence",
            ControlSource::Policy(_) => "Policy",
        })
    }
}

/// Serializable name of the control used for spectra, logged with results.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SpectrumControl {
    #[default]
    Zero,
    /// Hold the action taken at the labelled step.
    Held,
    /// Follow the current policy.
    Policy,
}

impl SpectrumControl {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumControl::Zero => "zero",
            SpectrumControl::Held => "held",
            SpectrumControl::Policy => "policy",
        }
    }
}

impl fmt::Display for SpectrumControl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpectrumControl {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(SpectrumControl::Zero),
            "held" => Ok(SpectrumControl::Held),
            "policy" => Ok(SpectrumControl::Policy),
            other => Err(Error::RewardSpec(format!("unknown spectrum control `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSettings {
    /// Number of integration steps `T`.
    pub horizon: usize,
    /// Re-orthogonalize every `stride` steps.
    pub stride: usize,
}

impl SpectrumSettings {
    pub fn new(horizon: usize) -> Self {
        Self { horizon, stride: 1 }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }
}

/// Finite-time Lyapunov exponents at a state, sorted non-increasing, in
/// bits per second.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSpectrum<F> {
    pub exponents: Vec<F>,
    pub horizon_steps: usize,
    pub dt: F,
    pub origin: StateVector<F>,
}

impl<F: Scalar> TruncatedSpectrum<F> {
    pub fn from_exponents(mut exponents: Vec<F>, horizon_steps: usize, dt: F, origin: StateVector<F>) -> Self {
        exponents.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self {
            exponents,
            horizon_steps,
            dt,
            origin,
        }
    }

    pub fn max(&self) -> F {
        self.exponents.first().copied().unwrap_or_else(F::zero)
    }

    pub fn sum(&self) -> F {
        self.exponents.iter().copied().sum()
    }

    /// The same exponents in nats per second.
    pub fn in_nats(&self) -> Vec<F> {
        self.exponents.iter().map(|&l| crate::scalar::bits_to_nats(l)).collect()
    }
}

/// Estimates the truncated spectrum at `s0` over `settings.horizon` steps.
pub fn truncated_spectrum<F: Scalar>(
    system: &SystemModel<F>,
    s0: &[F],
    settings: &SpectrumSettings,
    control: &ControlSource<'_, F>,
) -> Result<TruncatedSpectrum<F>> {
    truncated_spectrum_observed(system, s0, settings, control, &mut |_, _| {})
}

/// Like [`truncated_spectrum`], calling `observer(step, frame)` right after
/// each re-orthogonalization.
pub fn truncated_spectrum_observed<F: Scalar>(
    system: &SystemModel<F>,
    s0: &[F],
    settings: &SpectrumSettings,
    control: &ControlSource<'_, F>,
    observer: &mut dyn FnMut(usize, &[Vec<F>]),
) -> Result<TruncatedSpectrum<F>> {
    if settings.horizon == 0 {
        return Err(Error::InvalidParameter {
            key: "horizon".into(),
            reason: "must be at least 1".into(),
        });
    }
    if settings.stride == 0 {
        return Err(Error::InvalidParameter {
            key: "stride".into(),
            reason: "must be at least 1".into(),
        });
    }
    system.check_state(s0)?;
    let n = system.state_dim();
    let mut frame = OrthonormalFrame::<F>::standard(n).into_vectors();
    let mut sums = vec![F::zero(); n];
    let mut state: Vec<F> = s0.to_vec();

    for t in 0..settings.horizon {
        let a = control.action(system, t, &state);
        let (next, tangent) = system.step_with_tangent(&state, &a).map_err(|e| match e {
            Error::NonFiniteState(_) | Error::SingularMassMatrix(_) => Error::TrajectoryBlowUp { step: t },
            other => other,
        })?;
        for v in frame.iter_mut() {
            *v = tangent.mul_vec(v);
        }
        state = next.into_inner();
        if !state.iter().all(|x| x.is_finite()) || !frame.iter().flatten().all(|x| x.is_finite()) {
            return Err(Error::TrajectoryBlowUp { step: t + 1 });
        }
        if (t + 1) % settings.stride == 0 || t + 1 == settings.horizon {
            let norms = gram_schmidt_in_place(&mut frame)?;
            for (acc, r) in sums.iter_mut().zip(norms) {
                *acc += r.log2();
            }
            observer(t + 1, &frame);
        }
    }

    let elapsed = F::from_usize_lossy(settings.horizon) * system.dt();
    let exponents = sums.into_iter().map(|s| s / elapsed).collect();
    Ok(TruncatedSpectrum::from_exponents(
        exponents,
        settings.horizon,
        system.dt(),
        StateVector(s0.to_vec()),
    ))
}

/// Evaluates [`truncated_spectrum`] at many states. Results keep the input
/// order and are independent of `parallel`.
pub fn spectrum_batch<F: Scalar>(
    system: &SystemModel<F>,
    states: &[StateVector<F>],
    settings: &SpectrumSettings,
    control: &ControlSource<'_, F>,
    parallel: bool,
) -> Vec<Result<TruncatedSpectrum<F>>> {
    if parallel {
        let per_state = |s: &StateVector<F>| truncated_spectrum(system, s, settings, control);
        states.par_iter().map(per_state).collect()
    } else {
        states
            .iter()
            .map(|s| truncated_spectrum(system, s, settings, control))
            .collect()
    }
}
