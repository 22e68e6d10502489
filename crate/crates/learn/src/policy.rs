//! Tanh-squashed Gaussian policy.
//!
//! The network maps an observation to `2m` numbers: the pre-squash mean
//! `mu` and a raw log-std that is mapped smoothly into
//! `[LOG_STD_MIN, LOG_STD_MAX]`. An action is `center + half * tanh(u)` with
//! `u ~ N(mu, sigma^2)`.

use crate::nn::Mlp;
use rand::Rng;
use rand_distr::StandardNormal;
use suple_core::Scalar;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

/// `log(1 - tanh(u)^2)` without cancellation for large `|u|`.
pub fn log_one_minus_tanh_sq<F: Scalar>(u: F) -> F {
    let two = F::lit(2.0);
    two * (F::LN_2() - u - softplus(-two * u))
}

pub fn softplus<F: Scalar>(x: F) -> F {
    if x > F::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn squash_log_std<F: Scalar>(raw: F) -> (F, F) {
    let half_span = F::lit(0.5 * (LOG_STD_MAX - LOG_STD_MIN));
    let t = raw.tanh();
    let ls = F::lit(LOG_STD_MIN) + half_span * (t + F::one());
    (ls, half_span * (F::one() - t * t))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SquashedGaussian<F> {
    pub net: Mlp<F>,
    low: Vec<F>,
    high: Vec<F>,
}

/// One reparameterized draw and the quantities its gradients need.
#[derive(Clone, Debug)]
pub(crate) struct Draw<F> {
    pub mu: Vec<F>,
    pub log_std: Vec<F>,
    pub dlog_std_draw: Vec<F>,
    pub u: Vec<F>,
    /// `tanh(u)`, the action in `[-1, 1]` units.
    pub unit: Vec<F>,
    pub log_prob: Vec<F>,
}

impl<F: Scalar> SquashedGaussian<F> {
    pub fn new(net: Mlp<F>, low: Vec<F>, high: Vec<F>) -> Self {
        assert_eq!(low.len(), high.len());
        assert_eq!(net.output_dim(), 2 * low.len(), "network must output mean and log-std");
        Self { net, low, high }
    }

    pub fn action_dim(&self) -> usize {
        self.low.len()
    }

    pub fn bounds(&self) -> (&[F], &[F]) {
        (&self.low, &self.high)
    }

    fn half(&self, j: usize) -> F {
        (self.high[j] - self.low[j]) * F::lit(0.5)
    }

    fn center(&self, j: usize) -> F {
        (self.high[j] + self.low[j]) * F::lit(0.5)
    }

    /// Maps `[-1, 1]` units to the action box.
    pub fn scale(&self, unit: &[F]) -> Vec<F> {
        unit.iter()
            .enumerate()
            .map(|(j, &x)| self.center(j) + self.half(j) * x)
            .collect()
    }

    pub fn unscale(&self, action: &[F]) -> Vec<F> {
        action
            .iter()
            .enumerate()
            .map(|(j, &a)| (a - self.center(j)) / self.half(j))
            .collect()
    }

    /// `sum_j log(half_j)`: the log-Jacobian of `scale`.
    fn log_scale(&self) -> F {
        (0..self.action_dim()).map(|j| self.half(j).ln()).sum()
    }

    /// Deterministic action `tanh(mu)` in `[-1, 1]` units for a batch.
    pub fn mean_unit(&self, obs: &[F], batch: usize) -> Vec<F> {
        let m = self.action_dim();
        let out = self.net.forward(obs, batch);
        let mut units = Vec::with_capacity(batch * m);
        for b in 0..batch {
            units.extend(out[b * 2 * m..b * 2 * m + m].iter().map(|x| x.tanh()));
        }
        units
    }

    pub fn mean_action(&self, obs: &[F]) -> Vec<F> {
        self.scale(&self.mean_unit(obs, 1))
    }

    /// Draws from the policy given standard-normal noise `eps`, for a batch
    /// whose network output is `out`.
    pub(crate) fn draw(&self, out: &[F], eps: &[F], batch: usize) -> Draw<F> {
        let m = self.action_dim();
        let half_log_2pi = F::lit(0.5 * (2.0 * std::f64::consts::PI).ln());
        let log_scale = self.log_scale();
        let mut d = Draw {
            mu: Vec::with_capacity(batch * m),
            log_std: Vec::with_capacity(batch * m),
            dlog_std_draw: Vec::with_capacity(batch * m),
            u: Vec::with_capacity(batch * m),
            unit: Vec::with_capacity(batch * m),
            log_prob: Vec::with_capacity(batch),
        };
        for b in 0..batch {
            let row = &out[b * 2 * m..(b + 1) * 2 * m];
            let mut lp = -log_scale;
            for j in 0..m {
                let mu = row[j];
                let (ls, dls) = squash_log_std(row[m + j]);
                let e = eps[b * m + j];
                let u = mu + ls.exp() * e;
                lp += -F::lit(0.5) * e * e - ls - half_log_2pi - log_one_minus_tanh_sq(u);
                d.mu.push(mu);
                d.log_std.push(ls);
                d.dlog_std_draw.push(dls);
                d.u.push(u);
                d.unit.push(u.tanh());
            }
            d.log_prob.push(lp);
        }
        d
    }

    pub fn sample_noise<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<F> {
        (0..n).map(|_| F::lit(rng.sample::<f64, _>(StandardNormal))).collect()
    }

    /// Samples an action in the action box for one observation.
    pub fn sample<R: Rng + ?Sized>(&self, obs: &[F], rng: &mut R) -> Vec<F> {
        let out = self.net.forward(obs, 1);
        let eps = Self::sample_noise(self.action_dim(), rng);
        self.scale(&self.draw(&out, &eps, 1).unit)
    }

    /// Log-density of `action` (in the action box) at `obs`.
    pub fn log_prob(&self, obs: &[F], action: &[F]) -> F {
        let m = self.action_dim();
        let out = self.net.forward(obs, 1);
        let half_log_2pi = F::lit(0.5 * (2.0 * std::f64::consts::PI).ln());
        let mut lp = -self.log_scale();
        for (j, x) in self.unscale(action).into_iter().enumerate() {
            let u = x.atanh();
            let (ls, _) = squash_log_std(out[m + j]);
            let z = (u - out[j]) / ls.exp();
            lp += -F::lit(0.5) * z * z - ls - half_log_2pi - log_one_minus_tanh_sq(u);
        }
        lp
    }
}
