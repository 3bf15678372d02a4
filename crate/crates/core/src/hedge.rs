//! Hedging over the acquisition portfolio.
//!
//! Each epoch every acquisition function nominates a Q-batch. The hedge
//! keeps the full nomination history, re-scores it under the current
//! surrogate (rewards), normalizes the rewards into one scalar per
//! function, and draws the evaluated batch from the nominees with softmax
//! probabilities over those scalars.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gp::GaussianSurrogate;

/// Reward bookkeeping. Nominee points are stored in the surrogate's input
/// coordinates (the unit box) so rewards can query the posterior directly.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HedgeState {
    /// Softmax temperature; larger eta concentrates selection on the
    /// best-rewarded acquisition function.
    pub eta: f64,
    /// `nominees[epoch][l][q]` is the q-th point nominated by function l.
    nominees: Vec<Vec<Vec<Vec<f64>>>>,
    /// `rewards[epoch][l][q]`, filled by [`compute_rewards`].
    rewards: Vec<Vec<Vec<f64>>>,
}

impl HedgeState {
    pub fn new(eta: f64) -> Self {
        assert!(eta > 0.0, "eta must be > 0");
        Self {
            eta,
            nominees: Vec::new(),
            rewards: Vec::new(),
        }
    }

    /// Records one epoch's nominations (`per_function[l][q]`, unit coords).
    pub fn push_epoch(&mut self, per_function: Vec<Vec<Vec<f64>>>) {
        self.nominees.push(per_function);
    }

    pub fn epochs(&self) -> usize {
        self.nominees.len()
    }

    pub fn functions(&self) -> usize {
        self.nominees.first().map_or(0, Vec::len)
    }

    pub fn rewards(&self) -> &[Vec<Vec<f64>>] {
        &self.rewards
    }
}

/// Re-scores every historical nominee under the current surrogate: the
/// reward of a nominee is the posterior mean at its location. Returns the
/// state with the reward matrix filled.
pub fn compute_rewards(g: &GaussianSurrogate, state: HedgeState) -> HedgeState {
    let mut state = state;
    // Flatten all nominees into one posterior batch query.
    let mut flat: Vec<Vec<f64>> = Vec::new();
    for epoch in &state.nominees {
        for per_l in epoch {
            for point in per_l {
                flat.push(point.clone());
            }
        }
    }
    if flat.is_empty() {
        state.rewards.clear();
        return state;
    }
    let posterior = g.posterior_batch(&flat);
    let mut it = posterior.into_iter();
    state.rewards = state
        .nominees
        .iter()
        .map(|epoch| {
            epoch
                .iter()
                .map(|per_l| per_l.iter().map(|_| it.next().unwrap().0).collect())
                .collect()
        })
        .collect();
    state
}

/// Normalized reward per acquisition function:
/// `phi_l = sum_{j,q} (gamma_l_jq - min) / (max - min)` over the whole
/// reward matrix. When the matrix is empty or flat (max == min) every term
/// is defined as zero, which makes the subsequent selection uniform.
pub fn normalize_rewards(state: &HedgeState) -> Vec<f64> {
    let l_count = state.functions();
    if state.rewards.is_empty() || l_count == 0 {
        return vec![0.0; l_count];
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for epoch in &state.rewards {
        for per_l in epoch {
            for &g in per_l {
                lo = lo.min(g);
                hi = hi.max(g);
            }
        }
    }
    let span = hi - lo;
    let mut phi = vec![0.0; l_count];
    if !(span > 0.0) {
        return phi;
    }
    for epoch in &state.rewards {
        for (l, per_l) in epoch.iter().enumerate() {
            for &g in per_l {
                phi[l] += (g - lo) / span;
            }
        }
    }
    phi
}

/// Numerically stable softmax of `eta * phi`.
pub fn selection_probabilities(phi: &[f64], eta: f64) -> Vec<f64> {
    let peak = phi
        .iter()
        .map(|&p| eta * p)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = phi.iter().map(|&p| (eta * p - peak).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Draws the evaluated batch: slot `q` takes the q-th nominee of a source
/// function drawn with the softmax probabilities. Returns `(point, source)`
/// pairs; deterministic per seed.
pub fn select_batch(
    nominees: &[Vec<Vec<f64>>],
    phi: &[f64],
    eta: f64,
    q: usize,
    seed: u64,
) -> Vec<(Vec<f64>, usize)> {
    assert_eq!(nominees.len(), phi.len(), "one phi per function");
    assert!(eta > 0.0, "eta must be > 0");
    let p = selection_probabilities(phi, eta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..q)
        .map(|slot| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut source = p.len() - 1;
            for (l, &pl) in p.iter().enumerate() {
                acc += pl;
                if u < acc {
                    source = l;
                    break;
                }
            }
            (nominees[source][slot].clone(), source)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{GaussianSurrogate, KernelParams};
    use approx::assert_relative_eq;

    fn surrogate_1d(sigma_n: f64) -> GaussianSurrogate {
        let inputs = vec![vec![0.2], vec![0.8]];
        let targets = vec![1.0, 3.0];
        GaussianSurrogate::with_params(
            &inputs,
            &targets,
            KernelParams {
                h: vec![0.3],
                eps_f: 1.0,
                sigma_n,
            },
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn empty_history_gives_zero_phi_and_uniform_selection() {
        let g = surrogate_1d(0.1);
        let state = compute_rewards(&g, HedgeState::new(1.0));
        assert!(state.rewards().is_empty());
        let phi = normalize_rewards(&state);
        assert!(phi.is_empty());
        let p = selection_probabilities(&[0.0; 4], 1.0);
        for pl in &p {
            assert_relative_eq!(*pl, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn reward_of_a_training_point_is_its_observation() {
        let g = surrogate_1d(1e-9);
        let mut state = HedgeState::new(1.0);
        state.push_epoch(vec![vec![vec![0.2]], vec![vec![0.8]]]);
        let state = compute_rewards(&g, state);
        assert!((state.rewards()[0][0][0] - 1.0).abs() < 1e-6);
        assert!((state.rewards()[0][1][0] - 3.0).abs() < 1e-6);
    }

    /// Two-point linear-algebra oracle: adding an observation moves the
    /// posterior mean at a historical nominee, so rewards must change
    /// after a refit.
    #[test]
    fn rewards_shift_when_new_data_moves_the_posterior() {
        let params = KernelParams {
            h: vec![0.5],
            eps_f: 1.0,
            sigma_n: 1e-6,
        };
        let g1 = GaussianSurrogate::with_params(&[vec![0.0]], &[0.0], params.clone(), 0.0).unwrap();
        let mut state = HedgeState::new(1.0);
        state.push_epoch(vec![vec![vec![0.5]]]);
        let before = compute_rewards(&g1, state.clone()).rewards()[0][0][0];

        let g2 = GaussianSurrogate::with_params(
            &[vec![0.0], vec![0.5]],
            &[0.0, 1.0],
            params.clone(),
            0.0,
        )
        .unwrap();
        let after = compute_rewards(&g2, state).rewards()[0][0][0];
        assert!(
            (after - before).abs() >= 0.1,
            "posterior mean barely moved: {before} -> {after}"
        );
        // Oracle for the refit value: interpolation at the new point.
        assert!((after - 1.0).abs() < 1e-3);
    }

    #[test]
    fn normalization_endpoints() {
        let mut state = HedgeState::new(1.0);
        state.push_epoch(vec![vec![vec![0.0]], vec![vec![1.0]]]);
        state.rewards = vec![vec![vec![2.0], vec![10.0]]];
        let phi = normalize_rewards(&state);
        assert_eq!(phi, vec![0.0, 1.0]);
    }

    #[test]
    fn flat_rewards_normalize_to_zero() {
        let mut state = HedgeState::new(1.0);
        state.push_epoch(vec![vec![vec![0.0]], vec![vec![1.0]]]);
        state.rewards = vec![vec![vec![7.0], vec![7.0]]];
        assert_eq!(normalize_rewards(&state), vec![0.0, 0.0]);
    }

    #[test]
    fn worked_normalization_example_is_exact() {
        // L = 2, Q = 1, rewards per epoch: f1 (2, 6), f2 (10, 6).
        let mut state = HedgeState::new(1.0);
        state.push_epoch(vec![vec![vec![0.0]], vec![vec![1.0]]]);
        state.push_epoch(vec![vec![vec![0.2]], vec![vec![0.8]]]);
        state.rewards = vec![
            vec![vec![2.0], vec![10.0]],
            vec![vec![6.0], vec![6.0]],
        ];
        let phi = normalize_rewards(&state);
        assert_eq!(phi, vec![0.5, 1.5]);
    }

    #[test]
    fn probabilities_sum_to_one_and_shift_invariant() {
        let phi = vec![0.3, 1.9, -0.7, 0.0];
        let p = selection_probabilities(&phi, 2.5);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x > 0.0));
        let shifted: Vec<f64> = phi.iter().map(|x| x + 11.0).collect();
        let p2 = selection_probabilities(&shifted, 2.5);
        for (a, b) in p.iter().zip(&p2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_to_zero_flattens_selection() {
        let phi = vec![5.0, 0.0, -3.0];
        let p = selection_probabilities(&phi, 1e-12);
        for pl in &p {
            assert_relative_eq!(*pl, 1.0 / 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn strong_eta_concentrates_on_the_leader() {
        // Statistical oracle vs the closed-form softmax.
        let phi = vec![1.0, 0.0, 0.0, 0.0];
        let eta = 50.0;
        let nominees: Vec<Vec<Vec<f64>>> = (0..4).map(|l| vec![vec![l as f64]]).collect();
        let trials = 10_000;
        let hits = (0..trials)
            .filter(|&s| select_batch(&nominees, &phi, eta, 1, s as u64)[0].1 == 0)
            .count();
        let freq = hits as f64 / trials as f64;
        assert!(freq >= 0.999, "leader frequency {freq}");
    }

    #[test]
    fn selected_points_come_from_their_recorded_source() {
        let nominees: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|l| (0..4).map(|q| vec![l as f64, q as f64]).collect())
            .collect();
        let phi = vec![0.1, 0.9, 0.4];
        let batch = select_batch(&nominees, &phi, 1.0, 4, 99);
        assert_eq!(batch.len(), 4);
        for (slot, (point, source)) in batch.iter().enumerate() {
            assert_eq!(point, &nominees[*source][slot]);
        }
        assert_eq!(batch, select_batch(&nominees, &phi, 1.0, 4, 99));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // phi values are sums of terms in [0, 1], so realistic spreads
            // stay far from exp underflow.
            #[test]
            fn softmax_is_a_probability_vector(
                phi in prop::collection::vec(-20.0f64..20.0, 1..6),
                eta in 0.01f64..10.0,
            ) {
                let p = selection_probabilities(&phi, eta);
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(p.iter().all(|&x| x > 0.0));
            }

            #[test]
            fn softmax_shift_invariance(
                phi in prop::collection::vec(-5.0f64..5.0, 2..6),
                eta in 0.1f64..10.0,
                shift in -100.0f64..100.0,
            ) {
                let p = selection_probabilities(&phi, eta);
                let shifted: Vec<f64> = phi.iter().map(|x| x + shift).collect();
                let q = selection_probabilities(&shifted, eta);
                for (a, b) in p.iter().zip(&q) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
