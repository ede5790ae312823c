//! Dueling multilayer perceptron Q-function with hand-rolled forward and
//! backward passes and an adaptive-moment optimizer.
//!
//! Layout: input -> two ReLU hidden layers -> a scalar value head and a
//! 9-way advantage head, recombined as `Q = V + A - mean(A)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::sim::NUM_ACTIONS;
use crate::{Error, Result};

/// Dense layer, weights stored row-major as `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Linear {
    fn init<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        // Fan-in scaled uniform init for weights and biases. Nonzero biases
        // also keep pre-activations off the ReLU kink when an entire input
        // layer is dead, which would otherwise break gradient checks.
        let limit = 1.0 / (in_dim as f64).sqrt();
        let w = (0..in_dim * out_dim).map(|_| rng.gen_range(-limit..limit)).collect();
        let b = (0..out_dim).map(|_| rng.gen_range(-limit..limit)).collect();
        Self { w, b, in_dim, out_dim }
    }

    fn zeros_like(&self) -> Self {
        Self {
            w: vec![0.0; self.w.len()],
            b: vec![0.0; self.b.len()],
            in_dim: self.in_dim,
            out_dim: self.out_dim,
        }
    }

    fn forward(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.in_dim);
        debug_assert_eq!(out.len(), self.out_dim);
        for (o, (row, bias)) in out
            .iter_mut()
            .zip(self.w.chunks_exact(self.in_dim).zip(&self.b))
        {
            let mut acc = *bias;
            for (wi, xi) in row.iter().zip(x) {
                acc += wi * xi;
            }
            *o = acc;
        }
    }

    /// Accumulate gradients for `dy` at input `x`, and add the propagated
    /// input gradient into `dx` when given.
    fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Linear, dx: Option<&mut [f64]>) {
        for (j, &d) in dy.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grad.b[j] += d;
            let row = &mut grad.w[j * self.in_dim..(j + 1) * self.in_dim];
            for (g, xi) in row.iter_mut().zip(x) {
                *g += d * xi;
            }
        }
        if let Some(dx) = dx {
            for (j, &d) in dy.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &self.w[j * self.in_dim..(j + 1) * self.in_dim];
                for (g, wi) in dx.iter_mut().zip(row) {
                    *g += d * wi;
                }
            }
        }
    }
}

/// All parameters of the dueling Q-network.
#[derive(Debug, Clone, PartialEq)]
pub struct QNet {
    pub l1: Linear,
    pub l2: Linear,
    pub value: Linear,
    pub advantage: Linear,
}

impl QNet {
    pub fn new(input_dim: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            l1: Linear::init(input_dim, hidden, &mut rng),
            l2: Linear::init(hidden, hidden, &mut rng),
            value: Linear::init(hidden, 1, &mut rng),
            advantage: Linear::init(hidden, NUM_ACTIONS, &mut rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.l1.in_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.l1.out_dim
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            l1: self.l1.zeros_like(),
            l2: self.l2.zeros_like(),
            value: self.value.zeros_like(),
            advantage: self.advantage.zeros_like(),
        }
    }

    pub fn layers(&self) -> [&Linear; 4] {
        [&self.l1, &self.l2, &self.value, &self.advantage]
    }

    pub fn layers_mut(&mut self) -> [&mut Linear; 4] {
        [&mut self.l1, &mut self.l2, &mut self.value, &mut self.advantage]
    }

    pub fn num_params(&self) -> usize {
        self.layers().iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.layers()
            .iter()
            .all(|l| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }

    fn check_input(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.l1.in_dim {
            return Err(Error::Shape {
                expected: self.l1.in_dim,
                got: s.len(),
                context: "q-network input".into(),
            });
        }
        Ok(())
    }

    /// Q-values for one state.
    pub fn forward(&self, s: &[f64]) -> Result<[f64; NUM_ACTIONS]> {
        self.check_input(s)?;
        Ok(self.forward_cached(s).q)
    }

    fn forward_cached(&self, s: &[f64]) -> ForwardCache {
        let h = self.l1.out_dim;
        let mut cache = ForwardCache {
            input: s.to_vec(),
            h1: vec![0.0; h],
            h2: vec![0.0; h],
            adv: [0.0; NUM_ACTIONS],
            q: [0.0; NUM_ACTIONS],
        };
        self.l1.forward(s, &mut cache.h1);
        for v in &mut cache.h1 {
            *v = v.max(0.0);
        }
        self.l2.forward(&cache.h1, &mut cache.h2);
        for v in &mut cache.h2 {
            *v = v.max(0.0);
        }
        let mut value = [0.0];
        self.value.forward(&cache.h2, &mut value);
        self.advantage.forward(&cache.h2, &mut cache.adv);
        let mean_adv: f64 = cache.adv.iter().sum::<f64>() / NUM_ACTIONS as f64;
        for (q, a) in cache.q.iter_mut().zip(&cache.adv) {
            *q = value[0] + a - mean_adv;
        }
        cache
    }

    /// Greedy action for one state; ties break to the lowest index.
    pub fn greedy_action(&self, s: &[f64]) -> Result<usize> {
        let q = self.forward(s)?;
        let mut best = 0;
        for (i, &v) in q.iter().enumerate() {
            if v > q[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Backpropagate a scalar gradient on `Q(s, action)` into `grads`.
    fn backward(&self, cache: &ForwardCache, action: usize, dq: f64, grads: &mut QNet) {
        let h = self.l2.out_dim;
        // Q_a = V + A_a - mean(A): gradient splits across both heads.
        let mut d_adv = [0.0; NUM_ACTIONS];
        let inv = 1.0 / NUM_ACTIONS as f64;
        for (j, d) in d_adv.iter_mut().enumerate() {
            *d = dq * (if j == action { 1.0 - inv } else { -inv });
        }
        let d_value = [dq];

        let mut dh2 = vec![0.0; h];
        self.value.backward(&cache.h2, &d_value, &mut grads.value, Some(&mut dh2));
        self.advantage.backward(&cache.h2, &d_adv, &mut grads.advantage, Some(&mut dh2));
        for (g, &pre) in dh2.iter_mut().zip(&cache.h2) {
            if pre <= 0.0 {
                *g = 0.0;
            }
        }
        let mut dh1 = vec![0.0; self.l1.out_dim];
        self.l2.backward(&cache.h1, &dh2, &mut grads.l2, Some(&mut dh1));
        for (g, &pre) in dh1.iter_mut().zip(&cache.h1) {
            if pre <= 0.0 {
                *g = 0.0;
            }
        }
        self.l1.backward(&cache.input, &dh1, &mut grads.l1, None);
    }

    /// Mean squared error between `targets[i]` and `Q(s_i, a_i)`, plus its
    /// gradients with respect to every parameter. Targets are constants.
    pub fn loss_and_gradients(
        &self,
        batch: &[(&[f64], usize)],
        targets: &[f64],
    ) -> Result<(f64, QNet)> {
        if batch.len() != targets.len() {
            return Err(Error::Shape {
                expected: batch.len(),
                got: targets.len(),
                context: "batch vs targets".into(),
            });
        }
        let mut grads = self.zeros_like();
        let mut loss = 0.0;
        let scale = 1.0 / batch.len() as f64;
        for (&(s, a), &y) in batch.iter().zip(targets) {
            self.check_input(s)?;
            let cache = self.forward_cached(s);
            let err = cache.q[a] - y;
            loss += err * err * scale;
            self.backward(&cache, a, 2.0 * err * scale, &mut grads);
        }
        Ok((loss, grads))
    }
}

struct ForwardCache {
    input: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
    #[allow(dead_code)]
    adv: [f64; NUM_ACTIONS],
    q: [f64; NUM_ACTIONS],
}

/// Adaptive-moment gradient descent state.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: QNet,
    v: QNet,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(net: &QNet) -> Self {
        Self {
            m: net.zeros_like(),
            v: net.zeros_like(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One optimizer step. Fails on non-finite gradients without touching
    /// the parameters.
    pub fn apply_update(&mut self, net: &mut QNet, grads: &QNet, lr: f64) -> Result<()> {
        if !grads.all_finite() {
            return Err(Error::Divergence {
                step: self.t,
                detail: "non-finite gradient".into(),
            });
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let net_layers = net.layers_mut();
        let grad_layers = grads.layers();
        let m_layers = self.m.layers_mut();
        let v_layers = self.v.layers_mut();
        for i in 0..4 {
            let (pw, pb) = (&mut net_layers[i].w, &mut net_layers[i].b);
            let (gw, gb) = (&grad_layers[i].w, &grad_layers[i].b);
            let (mw, mb) = (&mut m_layers[i].w, &mut m_layers[i].b);
            let (vw, vb) = (&mut v_layers[i].w, &mut v_layers[i].b);
            for (((p, g), m), v) in pw
                .iter_mut()
                .zip(gw.iter())
                .zip(mw.iter_mut())
                .zip(vw.iter_mut())
            {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + self.eps);
            }
            for (((p, g), m), v) in pb
                .iter_mut()
                .zip(gb.iter())
                .zip(mb.iter_mut())
                .zip(vb.iter_mut())
            {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn zero_net(input: usize, hidden: usize) -> QNet {
        QNet::new(input, hidden, 0).zeros_like()
    }

    #[test]
    fn zero_net_outputs_zero() {
        let net = zero_net(7, 4);
        let q = net.forward(&[0.5; 7]).unwrap();
        assert_eq!(q, [0.0; NUM_ACTIONS]);
    }

    #[test]
    fn input_dim_is_checked() {
        let net = QNet::new(7, 4, 0);
        assert!(net.forward(&[0.0; 6]).is_err());
    }

    #[test]
    fn advantage_bias_shift_leaves_q_unchanged() {
        let mut net = QNet::new(7, 16, 3);
        let s = [0.3; 7];
        let q0 = net.forward(&s).unwrap();
        for b in &mut net.advantage.b {
            *b += 5.25;
        }
        let q1 = net.forward(&s).unwrap();
        for (a, b) in q0.iter().zip(&q1) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn hand_computed_forward_pass() {
        // One hidden unit per layer, weights set by hand.
        let mut net = zero_net(1, 1);
        net.l1.w = vec![2.0];
        net.l1.b = vec![0.5]; // h1 = relu(2x + 0.5)
        net.l2.w = vec![-1.0];
        net.l2.b = vec![3.0]; // h2 = relu(-h1 + 3)
        net.value.w = vec![0.5];
        net.value.b = vec![0.1]; // V = 0.5 h2 + 0.1
        net.advantage.w = vec![1.0; NUM_ACTIONS];
        for (j, b) in net.advantage.b.iter_mut().enumerate() {
            *b = j as f64 * 0.1; // A_j = h2 + 0.1 j
        }
        // x = 1: h1 = 2.5, h2 = 0.5, V = 0.35, A_j = 0.5 + 0.1 j,
        // mean(A) = 0.5 + 0.4, Q_j = 0.35 + 0.1 j - 0.4.
        let q = net.forward(&[1.0]).unwrap();
        for (j, &v) in q.iter().enumerate() {
            assert_abs_diff_eq!(v, 0.35 + 0.1 * j as f64 - 0.4, epsilon = 1e-12);
        }
    }

    #[test]
    fn loss_zero_when_targets_match() {
        let net = QNet::new(7, 8, 11);
        let s = [0.2; 7];
        let q = net.forward(&s).unwrap();
        let batch: Vec<(&[f64], usize)> = vec![(&s, 3)];
        let (loss, grads) = net.loss_and_gradients(&batch, &[q[3]]).unwrap();
        assert_abs_diff_eq!(loss, 0.0);
        assert!(grads.layers().iter().all(|l| l.w.iter().all(|&g| g == 0.0)));
    }

    #[test]
    fn duplicated_batch_matches_single() {
        let net = QNet::new(7, 8, 11);
        let s = [0.2; 7];
        let single: Vec<(&[f64], usize)> = vec![(&s, 1)];
        let dup: Vec<(&[f64], usize)> = vec![(&s, 1); 4];
        let (l1, _) = net.loss_and_gradients(&single, &[0.7]).unwrap();
        let (l4, _) = net.loss_and_gradients(&dup, &[0.7; 4]).unwrap();
        assert_abs_diff_eq!(l1, l4, epsilon = 1e-12);
    }

    /// Central finite differences over every parameter of a small net.
    fn finite_diff_check(seed: u64, input: usize, hidden: usize) -> f64 {
        let net = QNet::new(input, hidden, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let states: Vec<Vec<f64>> =
            (0..3).map(|_| (0..input).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let batch: Vec<(&[f64], usize)> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i % NUM_ACTIONS))
            .collect();
        let targets: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, grads) = net.loss_and_gradients(&batch, &targets).unwrap();

        let eps = 1e-5;
        let mut max_rel = 0.0f64;
        for layer_idx in 0..4 {
            for which in 0..2 {
                let len = if which == 0 {
                    net.layers()[layer_idx].w.len()
                } else {
                    net.layers()[layer_idx].b.len()
                };
                for k in 0..len {
                    let mut plus = net.clone();
                    let mut minus = net.clone();
                    {
                        let ls = plus.layers_mut();
                        if which == 0 { ls[layer_idx].w[k] += eps } else { ls[layer_idx].b[k] += eps }
                    }
                    {
                        let ls = minus.layers_mut();
                        if which == 0 { ls[layer_idx].w[k] -= eps } else { ls[layer_idx].b[k] -= eps }
                    }
                    let (lp, _) = plus.loss_and_gradients(&batch, &targets).unwrap();
                    let (lm, _) = minus.loss_and_gradients(&batch, &targets).unwrap();
                    let numeric = (lp - lm) / (2.0 * eps);
                    let analytic = if which == 0 {
                        grads.layers()[layer_idx].w[k]
                    } else {
                        grads.layers()[layer_idx].b[k]
                    };
                    let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                    max_rel = max_rel.max((analytic - numeric).abs() / denom);
                }
            }
        }
        max_rel
    }

    #[test]
    fn gradients_match_finite_differences() {
        let err = finite_diff_check(17, 5, 6);
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn adam_zero_gradient_is_identity() {
        let mut net = QNet::new(7, 8, 1);
        let before = net.clone();
        let grads = net.zeros_like();
        let mut opt = AdamState::new(&net);
        opt.apply_update(&mut net, &grads, 1e-3).unwrap();
        // Zero gradient keeps every parameter fixed (0 / (0 + eps) = 0).
        assert_eq!(net, before);
    }

    #[test]
    fn adam_rejects_non_finite_gradients() {
        let mut net = QNet::new(7, 8, 1);
        let mut grads = net.zeros_like();
        grads.l1.w[0] = f64::NAN;
        let mut opt = AdamState::new(&net);
        assert!(opt.apply_update(&mut net, &grads, 1e-3).is_err());
    }

    #[test]
    fn adam_decreases_quadratic_toy_loss() {
        // Regress Q(s, 0) toward 1 on a fixed state; loss must fall.
        let mut net = QNet::new(4, 8, 5);
        let mut opt = AdamState::new(&net);
        let s = [0.5, -0.25, 0.75, 0.1];
        let batch: Vec<(&[f64], usize)> = vec![(&s, 0)];
        let (first, _) = net.loss_and_gradients(&batch, &[1.0]).unwrap();
        let mut last = first;
        for _ in 0..100 {
            let (loss, grads) = net.loss_and_gradients(&batch, &[1.0]).unwrap();
            opt.apply_update(&mut net, &grads, 1e-2).unwrap();
            last = loss;
        }
        assert!(last < first * 0.5, "loss {first} -> {last}");
    }

    #[test]
    fn adam_determinism() {
        let run = || {
            let mut net = QNet::new(4, 8, 5);
            let mut opt = AdamState::new(&net);
            let s = [0.5, -0.25, 0.75, 0.1];
            let batch: Vec<(&[f64], usize)> = vec![(&s, 2)];
            for _ in 0..50 {
                let (_, grads) = net.loss_and_gradients(&batch, &[1.0]).unwrap();
                opt.apply_update(&mut net, &grads, 1e-3).unwrap();
            }
            net
        };
        assert_eq!(run(), run());
    }
}
