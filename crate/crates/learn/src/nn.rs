//! Fully connected networks with tanh hidden layers and a linear output,
//! evaluated on row-major batches.
//!
//! All parameters live in one flat vector so optimizers, target averaging
//! and checkpoints can treat a network as a plain slice. Layer `l` stores
//! its weights input-major (`w[i * out + o]`) followed by its bias.

use rand::Rng;
use suple_core::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<F> {
    sizes: Vec<usize>,
    params: Vec<F>,
}

/// Per-layer outputs kept for the backward pass; `layers[0]` is the input.
#[derive(Clone, Debug)]
pub struct Activations<F> {
    pub batch: usize,
    pub layers: Vec<Vec<F>>,
}

impl<F> Activations<F> {
    pub fn output(&self) -> &[F] {
        self.layers.last().expect("at least one layer")
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl<F: Scalar> Mlp<F> {
    /// Uniform initialization in `+-1/sqrt(fan_in)`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        assert!(
            sizes.len() >= 2 && sizes.iter().all(|&s| s > 0),
            "bad layer sizes {sizes:?}"
        );
        let mut params = Vec::with_capacity(param_count(sizes));
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for _ in 0..w[0] * w[1] + w[1] {
                params.push(F::lit(rng.random_range(-bound..bound)));
            }
        }
        Self {
            sizes: sizes.to_vec(),
            params,
        }
    }

    pub fn from_params(sizes: &[usize], params: Vec<F>) -> Option<Self> {
        (sizes.len() >= 2 && sizes.iter().all(|&s| s > 0) && params.len() == param_count(sizes)).then(|| Self {
            sizes: sizes.to_vec(),
            params,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[F] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    fn layer_offsets(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut off = 0;
        self.sizes.windows(2).map(move |w| {
            let start = off;
            off += w[0] * w[1] + w[1];
            (start, w[0], w[1])
        })
    }

    pub fn forward(&self, x: &[F], batch: usize) -> Vec<F> {
        self.forward_cached(x, batch).layers.pop().unwrap()
    }

    pub fn forward_cached(&self, x: &[F], batch: usize) -> Activations<F> {
        assert_eq!(x.len(), batch * self.input_dim(), "input shape");
        let last = self.sizes.len() - 2;
        let mut layers = Vec::with_capacity(self.sizes.len());
        layers.push(x.to_vec());
        for (l, (off, n_in, n_out)) in self.layer_offsets().enumerate() {
            let w = &self.params[off..off + n_in * n_out];
            let bias = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let input = &layers[l];
            let mut out = Vec::with_capacity(batch * n_out);
            for b in 0..batch {
                let mut y = bias.to_vec();
                for (i, &xi) in input[b * n_in..(b + 1) * n_in].iter().enumerate() {
                    let row = &w[i * n_out..(i + 1) * n_out];
                    for (yo, &wo) in y.iter_mut().zip(row) {
                        *yo += xi * wo;
                    }
                }
                if l != last {
                    for v in &mut y {
                        *v = tanh(*v);
                    }
                }
                out.extend_from_slice(&y);
            }
            layers.push(out);
        }
        Activations { batch, layers }
    }

    /// Backpropagates `grad_out` (dL/d output, batch-major). Parameter
    /// gradients are added into `grad_params` when given; the gradient with
    /// respect to the input is returned when `want_input` is set.
    pub fn backward(
        &self,
        acts: &Activations<F>,
        grad_out: &[F],
        mut grad_params: Option<&mut [F]>,
        want_input: bool,
    ) -> Option<Vec<F>> {
        let batch = acts.batch;
        assert_eq!(grad_out.len(), batch * self.output_dim(), "gradient shape");
        if let Some(g) = grad_params.as_deref() {
            assert_eq!(g.len(), self.params.len(), "parameter gradient shape");
        }
        let offsets: Vec<_> = self.layer_offsets().collect();
        let last = offsets.len() - 1;
        let mut delta = grad_out.to_vec();
        for (l, &(off, n_in, n_out)) in offsets.iter().enumerate().rev() {
            if l != last {
                for (d, &y) in delta.iter_mut().zip(&acts.layers[l + 1]) {
                    *d *= F::one() - y * y;
                }
            }
            let input = &acts.layers[l];
            if let Some(g) = grad_params.as_deref_mut() {
                let (gw, gb) = g[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
                for b in 0..batch {
                    let d = &delta[b * n_out..(b + 1) * n_out];
                    for (gbo, &dv) in gb.iter_mut().zip(d) {
                        *gbo += dv;
                    }
                    for (i, &xi) in input[b * n_in..(b + 1) * n_in].iter().enumerate() {
                        for (gwo, &dv) in gw[i * n_out..(i + 1) * n_out].iter_mut().zip(d) {
                            *gwo += xi * dv;
                        }
                    }
                }
            }
            if l == 0 && !want_input {
                return None;
            }
            let w = &self.params[off..off + n_in * n_out];
            let mut prev = vec![F::zero(); batch * n_in];
            for b in 0..batch {
                let d = &delta[b * n_out..(b + 1) * n_out];
                for (i, p) in prev[b * n_in..(b + 1) * n_in].iter_mut().enumerate() {
                    *p = dot4(&w[i * n_out..(i + 1) * n_out], d);
                }
            }
            delta = prev;
        }
        Some(delta)
    }
}

/// `tanh` through `expm1`, which is markedly cheaper than the libm routine
/// and accurate to a couple of ulps.
#[inline]
pub fn tanh<F: Scalar>(x: F) -> F {
    let limit = F::lit(20.0);
    let e = (F::lit(2.0) * x.max(-limit).min(limit)).exp_m1();
    e / (e + F::lit(2.0))
}

/// Dot product with four independent accumulators.
fn dot4<F: Scalar>(a: &[F], b: &[F]) -> F {
    let mut acc = [F::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for k in 0..4 {
            acc[k] += a[4 * c + k] * b[4 * c + k];
        }
    }
    let mut tail = F::zero();
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes_and_parameter_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Mlp::<f64>::new(&[3, 5, 2], &mut rng);
        assert_eq!(net.num_params(), 3 * 5 + 5 + 5 * 2 + 2);
        let y = net.forward(&[0.1, 0.2, 0.3, -1.0, 0.0, 1.0], 2);
        assert_eq!(y.len(), 4);
        assert!(y.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn batch_rows_are_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::<f64>::new(&[2, 8, 8, 1], &mut rng);
        let both = net.forward(&[0.5, -0.5, 2.0, 1.0], 2);
        assert_eq!(both[0], net.forward(&[0.5, -0.5], 1)[0]);
        assert_eq!(both[1], net.forward(&[2.0, 1.0], 1)[0]);
    }

    #[test]
    fn tanh_matches_std() {
        for k in -4000..4000 {
            let x = k as f64 * 7.3e-3;
            assert!((tanh(x) - x.tanh()).abs() < 1e-15);
        }
        assert_eq!(tanh(1e-300f64), 1e-300);
        assert!((tanh(0.3f32) - 0.3f32.tanh()).abs() < 1e-6);
        assert_eq!(tanh(800.0f64), 1.0);
        assert_eq!(tanh(-800.0f32), -1.0);
    }

    #[test]
    fn from_params_checks_length() {
        assert!(Mlp::<f32>::from_params(&[1, 1], vec![0.0; 2]).is_some());
        assert!(Mlp::<f32>::from_params(&[1, 1], vec![0.0; 3]).is_none());
    }
}
