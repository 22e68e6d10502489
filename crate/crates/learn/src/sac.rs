//! Soft actor-critic with twin critics, Polyak-averaged targets and an
//! optional learned entropy coefficient.

use crate::adam::Adam;
use crate::error::{Error, Result};
use crate::nn::Mlp;
use crate::policy::SquashedGaussian;
use crate::replay::Batch;
use rand::Rng;
use suple_core::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SacSettings<F> {
    pub gamma: F,
    pub tau: F,
    /// Entropy coefficient, or its initial value when `auto_alpha` is set.
    pub alpha: F,
    pub auto_alpha: bool,
    /// Entropy target for the learned coefficient; `-action_dim` if unset.
    pub target_entropy: Option<F>,
    pub lr_actor: F,
    pub lr_critic: F,
    pub lr_alpha: F,
    pub hidden: Vec<usize>,
}

impl<F: Scalar> Default for SacSettings<F> {
    fn default() -> Self {
        Self {
            gamma: F::lit(0.99),
            tau: F::lit(0.005),
            alpha: F::lit(0.2),
            auto_alpha: false,
            target_entropy: None,
            lr_actor: F::lit(3e-4),
            lr_critic: F::lit(3e-4),
            lr_alpha: F::lit(3e-4),
            hidden: vec![64, 64],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateStats<F> {
    pub critic_loss: [F; 2],
    pub actor_loss: F,
    /// Monte-Carlo estimate of the policy entropy over the batch.
    pub entropy: F,
    pub alpha: F,
}

#[derive(Clone, Debug)]
pub struct Sac<F> {
    pub actor: SquashedGaussian<F>,
    pub critics: [Mlp<F>; 2],
    pub targets: [Mlp<F>; 2],
    pub settings: SacSettings<F>,
    pub log_alpha: F,
    actor_opt: Adam<F>,
    critic_opts: [Adam<F>; 2],
    alpha_opt: Adam<F>,
    obs_dim: usize,
    updates: u64,
}

fn sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut s = vec![input];
    s.extend_from_slice(hidden);
    s.push(output);
    s
}

/// Row-wise concatenation of two batch-major blocks.
fn concat_rows<F: Scalar>(a: &[F], da: usize, b: &[F], db: usize, batch: usize) -> Vec<F> {
    let mut out = Vec::with_capacity(batch * (da + db));
    for r in 0..batch {
        out.extend_from_slice(&a[r * da..(r + 1) * da]);
        out.extend_from_slice(&b[r * db..(r + 1) * db]);
    }
    out
}

fn mean<F: Scalar>(v: &[F]) -> F {
    v.iter().copied().sum::<F>() / F::from_usize_lossy(v.len().max(1))
}

impl<F: Scalar> Sac<F> {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        low: Vec<F>,
        high: Vec<F>,
        settings: SacSettings<F>,
        rng: &mut R,
    ) -> Self {
        let m = low.len();
        let actor = SquashedGaussian::new(Mlp::new(&sizes(obs_dim, &settings.hidden, 2 * m), rng), low, high);
        let critic_sizes = sizes(obs_dim + m, &settings.hidden, 1);
        let critics = [Mlp::new(&critic_sizes, rng), Mlp::new(&critic_sizes, rng)];
        Self::from_parts(actor, critics.clone(), critics, settings.alpha.ln(), settings)
    }

    /// Reassembles an agent, e.g. from a checkpoint. Optimizer state starts fresh.
    pub fn from_parts(
        actor: SquashedGaussian<F>,
        critics: [Mlp<F>; 2],
        targets: [Mlp<F>; 2],
        log_alpha: F,
        settings: SacSettings<F>,
    ) -> Self {
        let obs_dim = actor.net.input_dim();
        Self {
            actor_opt: Adam::new(actor.net.num_params(), settings.lr_actor),
            critic_opts: [
                Adam::new(critics[0].num_params(), settings.lr_critic),
                Adam::new(critics[1].num_params(), settings.lr_critic),
            ],
            alpha_opt: Adam::new(1, settings.lr_alpha),
            actor,
            critics,
            targets,
            settings,
            log_alpha,
            obs_dim,
            updates: 0,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn action_dim(&self) -> usize {
        self.actor.action_dim()
    }

    pub fn alpha(&self) -> F {
        self.log_alpha.exp()
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    fn target_entropy(&self) -> F {
        self.settings
            .target_entropy
            .unwrap_or_else(|| -F::from_usize_lossy(self.action_dim()))
    }

    /// Soft Bellman targets `r + gamma (1 - done) (min_k Q'_k(s', a') - alpha log pi(a'|s'))`
    /// with `a'` drawn from the current policy using noise `eps`.
    pub fn critic_targets(&self, batch: &Batch<F>, eps: &[F]) -> Vec<F> {
        let n = batch.size;
        let m = self.action_dim();
        let out = self.actor.net.forward(&batch.next_obs, n);
        let draw = self.actor.draw(&out, eps, n);
        let input = concat_rows(&batch.next_obs, self.obs_dim, &draw.unit, m, n);
        let q1 = self.targets[0].forward(&input, n);
        let q2 = self.targets[1].forward(&input, n);
        let alpha = self.alpha();
        (0..n)
            .map(|b| {
                let soft = q1[b].min(q2[b]) - alpha * draw.log_prob[b];
                batch.reward[b] + self.settings.gamma * (F::one() - batch.done[b]) * soft
            })
            .collect()
    }

    /// Half mean squared error of critic `k` against `y`, and its gradient.
    pub fn critic_loss_grad(&self, k: usize, obs: &[F], act: &[F], y: &[F]) -> (F, Vec<F>) {
        let n = y.len();
        let input = concat_rows(obs, self.obs_dim, act, self.action_dim(), n);
        let acts = self.critics[k].forward_cached(&input, n);
        let q = acts.output();
        let inv = F::one() / F::from_usize_lossy(n);
        let resid: Vec<F> = q.iter().zip(y).map(|(&q, &y)| q - y).collect();
        let loss = F::lit(0.5) * inv * resid.iter().map(|&r| r * r).sum::<F>();
        let grad_out: Vec<F> = resid.iter().map(|&r| r * inv).collect();
        let mut grads = vec![F::zero(); self.critics[k].num_params()];
        self.critics[k].backward(&acts, &grad_out, Some(&mut grads), false);
        (loss, grads)
    }

    /// Reparameterized actor objective `mean(alpha log pi(a|s) - min_k Q_k(s, a))`
    /// for fixed noise `eps`, its gradient, and the per-sample log-probabilities.
    pub fn actor_loss_grad(&self, obs: &[F], eps: &[F], n: usize) -> (F, Vec<F>, Vec<F>) {
        let m = self.action_dim();
        let alpha = self.alpha();
        let acts = self.actor.net.forward_cached(obs, n);
        let draw = self.actor.draw(acts.output(), eps, n);
        let input = concat_rows(obs, self.obs_dim, &draw.unit, m, n);
        let c0 = self.critics[0].forward_cached(&input, n);
        let c1 = self.critics[1].forward_cached(&input, n);
        let inv = F::one() / F::from_usize_lossy(n);

        let mut loss = F::zero();
        let mut g0 = vec![F::zero(); n];
        let mut g1 = vec![F::zero(); n];
        for b in 0..n {
            let (q0, q1) = (c0.output()[b], c1.output()[b]);
            if q0 <= q1 {
                g0[b] = -inv;
            } else {
                g1[b] = -inv;
            }
            loss += inv * (alpha * draw.log_prob[b] - q0.min(q1));
        }
        let width = self.obs_dim + m;
        let d0 = self.critics[0].backward(&c0, &g0, None, true).unwrap();
        let d1 = self.critics[1].backward(&c1, &g1, None, true).unwrap();

        let two = F::lit(2.0);
        let mut grad_out = vec![F::zero(); n * 2 * m];
        for b in 0..n {
            for j in 0..m {
                let k = b * m + j;
                let dq_da = d0[b * width + self.obs_dim + j] + d1[b * width + self.obs_dim + j];
                let t = draw.unit[k];
                let sigma_eps = draw.log_std[k].exp() * eps[k];
                // d(log pi)/du = 2 tanh(u); d(-Q)/du = dq_da (1 - tanh^2 u), already scaled by -1/n.
                let dq_du = dq_da * (F::one() - t * t);
                let dmu = inv * alpha * two * t + dq_du;
                let dls = inv * alpha * (two * t * sigma_eps - F::one()) + dq_du * sigma_eps;
                grad_out[b * 2 * m + j] = dmu;
                grad_out[b * 2 * m + m + j] = dls * draw.dlog_std_draw[k];
            }
        }
        let mut grads = vec![F::zero(); self.actor.net.num_params()];
        self.actor.net.backward(&acts, &grad_out, Some(&mut grads), false);
        (loss, grads, draw.log_prob)
    }

    /// `target <- (1 - tau) target + tau online`, elementwise.
    pub fn polyak(&mut self) {
        let tau = self.settings.tau;
        for (t, c) in self.targets.iter_mut().zip(&self.critics) {
            for (tp, &cp) in t.params_mut().iter_mut().zip(c.params()) {
                *tp = (F::one() - tau) * *tp + tau * cp;
            }
        }
    }

    fn non_finite(&self, which: &'static str, batch: &Batch<F>, stats: &UpdateStats<F>) -> Error {
        let finite = |v: &[F]| v.iter().all(|x| x.is_finite());
        let (rmin, rmax) = batch
            .reward
            .iter()
            .fold((F::infinity(), F::neg_infinity()), |(lo, hi), &r| {
                (lo.min(r), hi.max(r))
            });
        Error::NonFiniteLoss {
            which,
            update: self.updates,
            dump: format!(
                "stats={stats:?} reward_range=[{rmin}, {rmax}] alpha={} actor_finite={} critics_finite={},{} targets_finite={},{}",
                self.alpha(),
                finite(self.actor.net.params()),
                finite(self.critics[0].params()),
                finite(self.critics[1].params()),
                finite(self.targets[0].params()),
                finite(self.targets[1].params()),
            ),
        }
    }

    /// One gradient step on both critics, the actor and (optionally) the
    /// entropy coefficient, followed by a Polyak step of the targets.
    pub fn update<R: Rng + ?Sized>(&mut self, batch: &Batch<F>, rng: &mut R) -> Result<UpdateStats<F>> {
        let n = batch.size;
        let m = self.action_dim();
        let mut stats = UpdateStats {
            critic_loss: [F::nan(); 2],
            actor_loss: F::nan(),
            entropy: F::nan(),
            alpha: self.alpha(),
        };

        let eps_next = SquashedGaussian::<F>::sample_noise(n * m, rng);
        let y = self.critic_targets(batch, &eps_next);
        for k in 0..2 {
            let (loss, grads) = self.critic_loss_grad(k, &batch.obs, &batch.act, &y);
            stats.critic_loss[k] = loss;
            if !loss.is_finite() {
                return Err(self.non_finite("critic", batch, &stats));
            }
            self.critic_opts[k].step(self.critics[k].params_mut(), &grads);
        }

        let eps = SquashedGaussian::<F>::sample_noise(n * m, rng);
        let (loss, grads, log_prob) = self.actor_loss_grad(&batch.obs, &eps, n);
        stats.actor_loss = loss;
        stats.entropy = -mean(&log_prob);
        if !loss.is_finite() {
            return Err(self.non_finite("actor", batch, &stats));
        }
        self.actor_opt.step(self.actor.net.params_mut(), &grads);

        if self.settings.auto_alpha {
            let grad = -(mean(&log_prob) + self.target_entropy());
            let mut la = [self.log_alpha];
            self.alpha_opt.step(&mut la, &[grad]);
            self.log_alpha = la[0];
            if !self.log_alpha.is_finite() {
                return Err(self.non_finite("entropy coefficient", batch, &stats));
            }
        }

        self.polyak();
        self.updates += 1;
        Ok(stats)
    }
}
