//! Acquisition portfolio and the genetic maximizer that proposes batches.
//!
//! Four scoring rules balance exploitation and exploration over the
//! surrogate posterior: upper confidence bound, expected improvement,
//! probability of improvement, and a stochastic Monte-Carlo score that
//! draws from the posterior. Each portfolio member nominates a Q-batch by
//! maximizing its score with a small genetic algorithm on the surrogate
//! (cheap, since no black-box calls are involved).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gp::{standard_normal, GaussianSurrogate};
use crate::optimizer::SearchSpace;

/// One member of the acquisition portfolio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcquisitionKind {
    Ucb { kappa: f64 },
    Ei { xi: f64 },
    Pi { xi: f64 },
    Smc { n_draws: usize },
}

impl AcquisitionKind {
    pub fn name(&self) -> &'static str {
        match self {
            AcquisitionKind::Ucb { .. } => "ucb",
            AcquisitionKind::Ei { .. } => "ei",
            AcquisitionKind::Pi { .. } => "pi",
            AcquisitionKind::Smc { .. } => "smc",
        }
    }

    /// The default four-member portfolio.
    pub fn default_portfolio(kappa: f64, xi: f64, n_draws: usize) -> Vec<AcquisitionKind> {
        vec![
            AcquisitionKind::Ucb { kappa },
            AcquisitionKind::Ei { xi },
            AcquisitionKind::Pi { xi },
            AcquisitionKind::Smc { n_draws },
        ]
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            AcquisitionKind::Ucb { kappa } if !(kappa > 0.0) => {
                Err(format!("ucb kappa must be > 0, got {kappa}"))
            }
            AcquisitionKind::Ei { xi } | AcquisitionKind::Pi { xi } if !(xi >= 0.0) => {
                Err(format!("xi must be >= 0, got {xi}"))
            }
            AcquisitionKind::Smc { n_draws } if n_draws < 1 => {
                Err("smc needs at least one draw".into())
            }
            _ => Ok(()),
        }
    }
}

/// Genetic-algorithm settings for [`propose`].
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_scale: f64,
    pub elitism: usize,
    /// Minimum pairwise distance (unit-box norm) between returned points.
    pub duplicate_tol: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 64,
            generations: 60,
            crossover_rate: 0.9,
            mutation_scale: 0.1,
            elitism: 2,
            duplicate_tol: 1e-3,
            seed: 0,
        }
    }
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (std::f64::consts::TAU).sqrt()
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Scores one posterior `(mu, var)` against the incumbent. `seed` only
/// matters for the stochastic Monte-Carlo member, whose draws it fixes.
pub fn score(kind: &AcquisitionKind, mu: f64, var: f64, incumbent: f64, seed: u64) -> f64 {
    debug_assert!(var >= 0.0);
    let sigma = var.max(0.0).sqrt();
    match *kind {
        AcquisitionKind::Ucb { kappa } => mu + kappa * sigma,
        AcquisitionKind::Pi { xi } => {
            let diff = mu - incumbent - xi;
            if sigma == 0.0 {
                if diff > 0.0 {
                    1.0
                } else if diff < 0.0 {
                    0.0
                } else {
                    0.5
                }
            } else {
                normal_cdf(diff / sigma)
            }
        }
        AcquisitionKind::Ei { xi } => {
            let diff = mu - incumbent - xi;
            if sigma == 0.0 {
                diff.max(0.0)
            } else {
                let z = diff / sigma;
                diff * normal_cdf(z) + sigma * normal_pdf(z)
            }
        }
        AcquisitionKind::Smc { n_draws } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = n_draws.max(1);
            let mut acc = 0.0;
            for _ in 0..n {
                acc += mu + sigma * standard_normal(&mut rng);
            }
            acc / n as f64
        }
    }
}

/// Stable per-point seed for the stochastic score: mixes the proposal seed
/// with the exact bit pattern of the query point, so a point scores the
/// same wherever it appears within one proposal round.
fn point_seed(base: u64, unit: &[f64]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64 ^ base;
    for v in unit {
        for b in v.to_bits().to_le_bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    }
    hash
}

fn score_population(
    kind: &AcquisitionKind,
    g: &GaussianSurrogate,
    space: &SearchSpace,
    pop: &[Vec<f64>],
    seed: u64,
    kstar: &mut nalgebra::DMatrix<f64>,
) -> Vec<f64> {
    let incumbent = g.best_target();
    let unit: Vec<Vec<f64>> = pop.iter().map(|w| space.to_unit(w)).collect();
    let posterior = g.posterior_batch_with(&unit, kstar);
    posterior
        .into_iter()
        .zip(&unit)
        .map(|((mu, var), u)| score(kind, mu, var, incumbent, point_seed(seed, u)))
        .collect()
}

/// Proposes the `q` best mutually distinct individuals from the final GA
/// population, maximizing the acquisition score inside `space`.
/// Deterministic per `cfg.seed`; always returns exactly `q` points.
pub fn propose(
    kind: &AcquisitionKind,
    g: &GaussianSurrogate,
    space: &SearchSpace,
    q: usize,
    cfg: &GaConfig,
) -> Vec<Vec<f64>> {
    assert!(q >= 1, "q must be >= 1");
    let pop_size = cfg.population.max(2 * q).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Seed part of the population with the best designs seen so far (the
    // acquisition peak usually sits near one of them); fill the rest
    // uniformly.
    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(pop_size);
    let n_seeded = (pop_size / 8).min(g.len());
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| {
        g.training_targets()[b]
            .total_cmp(&g.training_targets()[a])
            .then(a.cmp(&b))
    });
    for &i in order.iter().take(n_seeded) {
        pop.push(space.from_unit(&g.training_inputs()[i]));
    }
    while pop.len() < pop_size {
        pop.push(space.sample(&mut rng));
    }
    let mut kstar = nalgebra::DMatrix::zeros(g.len(), pop_size);
    let mut scores = score_population(kind, g, space, &pop, cfg.seed, &mut kstar);

    let dim = space.dim();
    let mutate_prob = 1.0 / dim as f64;
    for _ in 0..cfg.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

        let mut next: Vec<Vec<f64>> = order
            .iter()
            .take(cfg.elitism.min(pop.len()))
            .map(|&i| pop[i].clone())
            .collect();
        while next.len() < pop_size {
            let p1 = tournament(&pop, &scores, 3, &mut rng);
            let p2 = tournament(&pop, &scores, 3, &mut rng);
            let mut child = if rng.gen::<f64>() < cfg.crossover_rate {
                blend(&pop[p1], &pop[p2], &mut rng)
            } else {
                pop[p1].clone()
            };
            for d in 0..dim {
                let (lo, hi) = space.bounds()[d];
                if rng.gen::<f64>() < mutate_prob {
                    child[d] += cfg.mutation_scale * (hi - lo) * standard_normal(&mut rng);
                }
                // The blend extrapolates past its parents, so clamp every
                // coordinate, not just mutated ones.
                child[d] = child[d].clamp(lo, hi);
            }
            next.push(child);
        }
        pop = next;
        scores = score_population(kind, g, space, &pop, cfg.seed, &mut kstar);
    }

    // Rank the final population and pick the q best that are pairwise
    // distinct in unit-box norm; top up with best leftovers if convergence
    // collapsed the population.
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut picked: Vec<usize> = Vec::with_capacity(q);
    for &i in &order {
        if picked.len() == q {
            break;
        }
        if picked
            .iter()
            .all(|&j| space.unit_distance(&pop[i], &pop[j]) >= cfg.duplicate_tol)
        {
            picked.push(i);
        }
    }
    for &i in &order {
        if picked.len() == q {
            break;
        }
        if !picked.contains(&i) {
            picked.push(i);
        }
    }
    picked.into_iter().map(|i| pop[i].clone()).collect()
}

fn tournament(pop: &[Vec<f64>], scores: &[f64], k: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..k {
        let challenger = rng.gen_range(0..pop.len());
        if scores[challenger] > scores[best] {
            best = challenger;
        }
    }
    best
}

fn blend(a: &[f64], b: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let lambda = rng.gen_range(-0.1..1.1);
            lambda * x + (1.0 - lambda) * y
        })
        .collect()
}

/// Mutation step for a nominated batch: any point closer than `tol`
/// (unit-box norm) to another batch member is, with probability `beta`,
/// resampled uniformly inside the space. Output length equals input length.
pub fn mutate_batch(
    points: &[Vec<f64>],
    space: &SearchSpace,
    beta: f64,
    tol: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    debug_assert!((0.0..=1.0).contains(&beta));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<f64>> = points.to_vec();
    for i in 0..out.len() {
        let near = out
            .iter()
            .enumerate()
            .any(|(j, p)| j != i && space.unit_distance(&out[i], p) < tol);
        if !near {
            continue;
        }
        if rng.gen::<f64>() < beta {
            for _ in 0..100 {
                let cand = space.sample(&mut rng);
                if out
                    .iter()
                    .enumerate()
                    .all(|(j, p)| j == i || space.unit_distance(&cand, p) >= tol)
                {
                    out[i] = cand;
                    break;
                }
            }
        }
    }
    out
}
