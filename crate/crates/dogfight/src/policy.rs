//! Action-selection policies over flat stacked observations.

use rand::Rng;

use crate::learner::TrainConfig;
use crate::net::QNet;
use crate::sim::NUM_ACTIONS;
use crate::Result;

/// Maps a flat stacked observation to an action index in `0..9`.
pub trait Policy {
    fn select<R: Rng>(&self, obs: &[f64], rng: &mut R) -> Result<usize>;
}

/// Always the argmax of the Q-network; ties break to the lowest index.
pub struct GreedyPolicy<'a> {
    pub net: &'a QNet,
}

impl Policy for GreedyPolicy<'_> {
    fn select<R: Rng>(&self, obs: &[f64], _rng: &mut R) -> Result<usize> {
        self.net.greedy_action(obs)
    }
}

/// Uniform over the nine actions.
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn select<R: Rng>(&self, _obs: &[f64], rng: &mut R) -> Result<usize> {
        Ok(rng.gen_range(0..NUM_ACTIONS))
    }
}

/// Greedy with probability `1 - epsilon`, uniform otherwise.
pub struct EpsilonGreedy<'a> {
    pub net: &'a QNet,
    pub epsilon: f64,
}

impl Policy for EpsilonGreedy<'_> {
    fn select<R: Rng>(&self, obs: &[f64], rng: &mut R) -> Result<usize> {
        if rng.gen::<f64>() < self.epsilon {
            Ok(rng.gen_range(0..NUM_ACTIONS))
        } else {
            self.net.greedy_action(obs)
        }
    }
}

/// Linearly annealed exploration rate: `eps_initial` at step 0 down to
/// `eps_final` at `eps_anneal_steps`, constant afterward.
pub fn epsilon_at(step: u64, cfg: &TrainConfig) -> f64 {
    if step >= cfg.eps_anneal_steps {
        return cfg.eps_final;
    }
    let frac = step as f64 / cfg.eps_anneal_steps as f64;
    cfg.eps_initial + (cfg.eps_final - cfg.eps_initial) * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn epsilon_schedule_endpoints() {
        let cfg = TrainConfig::default();
        assert_eq!(epsilon_at(0, &cfg), 1.0);
        assert_eq!(epsilon_at(100_000, &cfg), 0.05);
        assert_eq!(epsilon_at(1_000_000, &cfg), 0.05);
        assert!((epsilon_at(50_000, &cfg) - 0.525).abs() < 1e-12);
    }

    #[test]
    fn greedy_is_scale_invariant() {
        let net = QNet::new(7, 8, 9);
        let mut scaled = net.clone();
        for l in scaled.layers_mut() {
            // Scaling the output heads scales every Q-value positively.
            if l.out_dim == 1 || l.out_dim == NUM_ACTIONS {
                for w in l.w.iter_mut().chain(l.b.iter_mut()) {
                    *w *= 3.0;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for i in 0..20 {
            let obs: Vec<f64> = (0..7).map(|j| ((i * 7 + j) as f64 * 0.37).sin()).collect();
            let a = GreedyPolicy { net: &net }.select(&obs, &mut rng).unwrap();
            let b = GreedyPolicy { net: &scaled }.select(&obs, &mut rng).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn random_policy_covers_all_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; NUM_ACTIONS];
        for _ in 0..9000 {
            counts[RandomPolicy.select(&[], &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!(c > 800 && c < 1200, "counts {counts:?}");
        }
    }
}
