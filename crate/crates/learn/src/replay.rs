use rand::Rng;
use suple_core::Scalar;

/// Fixed-capacity FIFO store of `(obs, action, reward, next_obs, done)`.
#[derive(Clone, Debug)]
pub struct ReplayBuffer<F> {
    capacity: usize,
    obs_dim: usize,
    act_dim: usize,
    obs: Vec<F>,
    act: Vec<F>,
    reward: Vec<F>,
    next_obs: Vec<F>,
    done: Vec<F>,
    head: usize,
    len: usize,
    pushed: u64,
}

/// A sampled minibatch, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch<F> {
    pub size: usize,
    pub obs: Vec<F>,
    pub act: Vec<F>,
    pub reward: Vec<F>,
    pub next_obs: Vec<F>,
    pub done: Vec<F>,
}

impl<F: Scalar> ReplayBuffer<F> {
    pub fn new(capacity: usize, obs_dim: usize, act_dim: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            obs_dim,
            act_dim,
            obs: vec![F::zero(); capacity * obs_dim],
            act: vec![F::zero(); capacity * act_dim],
            reward: vec![F::zero(); capacity],
            next_obs: vec![F::zero(); capacity * obs_dim],
            done: vec![F::zero(); capacity],
            head: 0,
            len: 0,
            pushed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total number of transitions ever pushed.
    pub fn pushed(&self) -> u64 {
        self.pushed
    }

    pub fn push(&mut self, obs: &[F], act: &[F], reward: F, next_obs: &[F], done: bool) {
        assert_eq!(obs.len(), self.obs_dim);
        assert_eq!(next_obs.len(), self.obs_dim);
        assert_eq!(act.len(), self.act_dim);
        let k = self.head;
        self.obs[k * self.obs_dim..(k + 1) * self.obs_dim].copy_from_slice(obs);
        self.next_obs[k * self.obs_dim..(k + 1) * self.obs_dim].copy_from_slice(next_obs);
        self.act[k * self.act_dim..(k + 1) * self.act_dim].copy_from_slice(act);
        self.reward[k] = reward;
        self.done[k] = if done { F::one() } else { F::zero() };
        self.head = (self.head + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
        self.pushed += 1;
    }

    /// Slot of the `k`-th oldest stored transition.
    fn slot(&self, k: usize) -> usize {
        (self.head + self.capacity - self.len + k) % self.capacity
    }

    /// Reward of the `k`-th oldest stored transition.
    pub fn reward_at(&self, k: usize) -> F {
        self.reward[self.slot(k)]
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Batch<F> {
        assert!(self.len > 0, "sampling from an empty buffer");
        let mut batch = Batch {
            size,
            obs: Vec::with_capacity(size * self.obs_dim),
            act: Vec::with_capacity(size * self.act_dim),
            reward: Vec::with_capacity(size),
            next_obs: Vec::with_capacity(size * self.obs_dim),
            done: Vec::with_capacity(size),
        };
        for _ in 0..size {
            let k = self.slot(rng.random_range(0..self.len));
            batch
                .obs
                .extend_from_slice(&self.obs[k * self.obs_dim..(k + 1) * self.obs_dim]);
            batch
                .next_obs
                .extend_from_slice(&self.next_obs[k * self.obs_dim..(k + 1) * self.obs_dim]);
            batch
                .act
                .extend_from_slice(&self.act[k * self.act_dim..(k + 1) * self.act_dim]);
            batch.reward.push(self.reward[k]);
            batch.done.push(self.done[k]);
        }
        batch
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evicts_oldest_first() {
        let mut buf = ReplayBuffer::<f64>::new(3, 1, 1);
        for i in 0..5 {
            buf.push(&[i as f64], &[0.0], i as f64, &[0.0], false);
        }
        assert_eq!(buf.len(), 3);
        assert_eq!(buf.pushed(), 5);
        assert_eq!(
            (0..3).map(|k| buf.reward_at(k)).collect::<Vec<_>>(),
            vec![2.0, 3.0, 4.0]
        );
    }
}
