//! Noisy Gaussian-process surrogate.
//!
//! The kernel is an anisotropic squared exponential over Euclidean
//! distances, `ker(w, w') = eps_f^2 * exp(-1/2 * sum_d (w_d - w'_d)^2 / h_d^2)`,
//! with one covariance length per input dimension. Inputs are expected in
//! the unit box (the optimizer scales designs before fitting); targets are
//! standardized internally during hyper-parameter search and the fitted
//! surrogate is expressed back in original target units.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{
    blocked_cholesky, blocked_cholesky_in_place, solve_lower_mut, solve_lower_transpose_mut,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least 2 training points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid kernel parameters: {0}")]
    InvalidParams(String),
    #[error("covariance factorization failed even after jitter escalation")]
    FactorizationFailed,
}

/// Kernel hyper-parameters: per-dimension covariance lengths, signal
/// amplitude, and observation noise.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    pub h: Vec<f64>,
    pub eps_f: f64,
    pub sigma_n: f64,
}

impl KernelParams {
    pub fn validate(&self) -> Result<(), GpError> {
        if self.h.is_empty() || self.h.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(GpError::InvalidParams(format!(
                "covariance lengths must be finite and > 0, got {:?}",
                self.h
            )));
        }
        if !(self.eps_f > 0.0) || !self.eps_f.is_finite() {
            return Err(GpError::InvalidParams(format!(
                "eps_f must be finite and > 0, got {}",
                self.eps_f
            )));
        }
        if !(self.sigma_n >= 0.0) || !self.sigma_n.is_finite() {
            return Err(GpError::InvalidParams(format!(
                "sigma_n must be finite and >= 0, got {}",
                self.sigma_n
            )));
        }
        Ok(())
    }
}

/// Covariance between two points under `params`.
pub fn kernel(w: &[f64], w2: &[f64], params: &KernelParams) -> Result<f64, GpError> {
    if w.len() != params.h.len() || w2.len() != params.h.len() {
        return Err(GpError::DimensionMismatch {
            expected: params.h.len(),
            got: if w.len() != params.h.len() {
                w.len()
            } else {
                w2.len()
            },
        });
    }
    let mut q = 0.0;
    for d in 0..w.len() {
        let delta = (w[d] - w2[d]) / params.h[d];
        q += delta * delta;
    }
    Ok(params.eps_f * params.eps_f * (-0.5 * q).exp())
}

/// Search settings for [`fit`]. `n_starts` local searches run from seeded
/// starting points (plus the warm start when given), each capped at
/// `max_evals_per_start` likelihood evaluations.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub n_starts: usize,
    pub max_evals_per_start: usize,
    pub seed: u64,
    pub warm_start: Option<KernelParams>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_starts: 8,
            max_evals_per_start: 40,
            seed: 0,
            warm_start: None,
        }
    }
}

// Log-space search bounds for unit-box inputs and standardized targets.
const LOG_H_BOUNDS: (f64, f64) = (-4.605170185988091, 2.302585092994046); // ln 0.01 .. ln 10
const LOG_EPS_BOUNDS: (f64, f64) = (-3.0, 3.0);
const LOG_SIGMA_BOUNDS: (f64, f64) = (-8.0, 0.0);

/// A fitted surrogate: immutable after construction and safe to query from
/// multiple threads.
#[derive(Debug)]
pub struct GaussianSurrogate {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    params: KernelParams,
    prior_mean: f64,
    chol_l: DMatrix<f64>,
    alpha: DVector<f64>,
    jitter: f64,
    degenerate_data: bool,
    var_clamps: AtomicU64,
}

impl GaussianSurrogate {
    /// Builds a surrogate directly from the given hyper-parameters without
    /// any fitting or target standardization. The prior mean is used as the
    /// far-field prediction.
    pub fn with_params(
        inputs: &[Vec<f64>],
        targets: &[f64],
        params: KernelParams,
        prior_mean: f64,
    ) -> Result<Self, GpError> {
        params.validate()?;
        let n = inputs.len();
        if n != targets.len() {
            return Err(GpError::DimensionMismatch {
                expected: n,
                got: targets.len(),
            });
        }
        if n < 1 {
            return Err(GpError::TooFewPoints(n));
        }
        let dim = params.h.len();
        for w in inputs {
            if w.len() != dim {
                return Err(GpError::DimensionMismatch {
                    expected: dim,
                    got: w.len(),
                });
            }
        }
        let dist2 = PackedDistances::new(inputs, dim);
        let inv_h2: Vec<f64> = params.h.iter().map(|h| 1.0 / (h * h)).collect();
        let k = dist2.covariance(&inv_h2, params.eps_f, params.sigma_n);
        let (chol_l, jitter) = cholesky_with_jitter(k, params.eps_f * params.eps_f)
            .ok_or(GpError::FactorizationFailed)?;
        if jitter > 0.0 {
            log::debug!("covariance factorization needed jitter {jitter:e}");
        }
        let resid = DVector::from_iterator(n, targets.iter().map(|&y| y - prior_mean));
        let alpha = chol_solve(&chol_l, &resid);
        Ok(Self {
            inputs: inputs.to_vec(),
            targets: targets.to_vec(),
            params,
            prior_mean,
            chol_l,
            alpha,
            jitter,
            degenerate_data: false,
            var_clamps: AtomicU64::new(0),
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.params.h.len()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    /// Jitter added to the covariance diagonal during factorization
    /// (0 when none was needed).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// True when [`fit`] saw identical targets and fell back to a
    /// constant-mean surrogate.
    pub fn degenerate_data(&self) -> bool {
        self.degenerate_data
    }

    /// How many posterior variances have been clamped up to zero.
    pub fn variance_clamps(&self) -> u64 {
        self.var_clamps.load(Ordering::Relaxed)
    }

    /// Best (largest) training target; acquisition functions use it as the
    /// incumbent.
    pub fn best_target(&self) -> f64 {
        self.targets
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn training_inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn training_targets(&self) -> &[f64] {
        &self.targets
    }

    fn cross_covariance(&self, points: &[Vec<f64>]) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(self.len(), points.len());
        self.cross_covariance_into(points, &mut k);
        k
    }

    fn cross_covariance_into(&self, points: &[Vec<f64>], k: &mut DMatrix<f64>) {
        debug_assert_eq!(k.nrows(), self.len());
        debug_assert_eq!(k.ncols(), points.len());
        let eps2 = self.params.eps_f * self.params.eps_f;
        let inv_h2: Vec<f64> = self.params.h.iter().map(|h| 1.0 / (h * h)).collect();
        for (c, w) in points.iter().enumerate() {
            for (r, x) in self.inputs.iter().enumerate() {
                let mut q = 0.0;
                for d in 0..self.dim() {
                    let delta = x[d] - w[d];
                    q += delta * delta * inv_h2[d];
                }
                k[(r, c)] = eps2 * (-0.5 * q).exp();
            }
        }
    }

    /// Posterior mean and variance at one point, in original target units.
    pub fn posterior(&self, w: &[f64]) -> (f64, f64) {
        let point = [w.to_vec()];
        self.posterior_batch(&point)[0]
    }

    /// Posterior mean and variance at many points.
    pub fn posterior_batch(&self, points: &[Vec<f64>]) -> Vec<(f64, f64)> {
        let mut kstar = DMatrix::zeros(self.len(), points.len());
        self.posterior_batch_with(points, &mut kstar)
    }

    /// Like [`GaussianSurrogate::posterior_batch`] but reusing a caller
    /// buffer of shape (training points, query points); hot loops call
    /// this thousands of times per epoch.
    pub(crate) fn posterior_batch_with(
        &self,
        points: &[Vec<f64>],
        kstar: &mut DMatrix<f64>,
    ) -> Vec<(f64, f64)> {
        self.cross_covariance_into(points, kstar);
        let mu: Vec<f64> = (0..points.len())
            .map(|c| self.prior_mean + kstar.column(c).dot(&self.alpha))
            .collect();
        // V = L^-1 K*; var = eps_f^2 - ||V_col||^2
        solve_lower_mut(&self.chol_l, kstar);
        let eps2 = self.params.eps_f * self.params.eps_f;
        mu.into_iter()
            .enumerate()
            .map(|(c, m)| {
                let v = eps2 - kstar.column(c).norm_squared();
                let v = if v < 0.0 {
                    self.var_clamps.fetch_add(1, Ordering::Relaxed);
                    0.0
                } else {
                    v
                };
                (m, v)
            })
            .collect()
    }

    /// One joint posterior draw over `points`; deterministic under `seed`.
    /// Exactly coincident query points receive identical sampled values.
    pub fn sample_posterior(&self, points: &[Vec<f64>], seed: u64) -> Vec<f64> {
        // Deduplicate exact coincidences so duplicates share one draw and
        // the joint covariance is not singular by construction.
        let mut unique: Vec<Vec<f64>> = Vec::new();
        let mut map = Vec::with_capacity(points.len());
        for p in points {
            match unique.iter().position(|u| u == p) {
                Some(i) => map.push(i),
                None => {
                    unique.push(p.clone());
                    map.push(unique.len() - 1);
                }
            }
        }
        let m = unique.len();
        let kstar = self.cross_covariance(&unique);
        let mut v = kstar.clone();
        solve_lower_mut(&self.chol_l, &mut v);

        let eps2 = self.params.eps_f * self.params.eps_f;
        let inv_h2: Vec<f64> = self.params.h.iter().map(|h| 1.0 / (h * h)).collect();
        let mut cov = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let mut q = 0.0;
                for d in 0..self.dim() {
                    let delta = unique[i][d] - unique[j][d];
                    q += delta * delta * inv_h2[d];
                }
                let prior = eps2 * (-0.5 * q).exp();
                let post = prior - v.column(i).dot(&v.column(j));
                cov[(i, j)] = post;
                cov[(j, i)] = post;
            }
        }
        let mu: Vec<f64> = (0..m)
            .map(|c| self.prior_mean + kstar.column(c).dot(&self.alpha))
            .collect();

        let eig = cov.symmetric_eigen();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..m).map(|_| standard_normal(&mut rng)).collect();
        let mut draw = mu;
        for (e, lambda) in eig.eigenvalues.iter().enumerate() {
            if *lambda <= 0.0 {
                continue;
            }
            let scale = lambda.sqrt() * z[e];
            for (i, value) in draw.iter_mut().enumerate() {
                *value += scale * eig.eigenvectors[(i, e)];
            }
        }
        map.into_iter().map(|i| draw[i]).collect()
    }
}

/// One standard-normal variate by Box-Muller; depends only on the rng
/// stream, so draws reproduce across platforms.
pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen::<f64>();
        if u <= f64::MIN_POSITIVE {
            continue;
        }
        let v: f64 = rng.gen::<f64>();
        return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
    }
}

/// Pairwise squared distances packed per entry: for entry (i >= j) the
/// `dim` per-dimension squared differences are contiguous, which keeps the
/// kernel evaluation cache-friendly during hyper-parameter search.
struct PackedDistances {
    n: usize,
    dim: usize,
    data: Vec<f64>,
}

impl PackedDistances {
    fn new(inputs: &[Vec<f64>], dim: usize) -> Self {
        let n = inputs.len();
        let mut data = Vec::with_capacity(n * (n + 1) / 2 * dim);
        for i in 0..n {
            for j in 0..=i {
                for d in 0..dim {
                    let delta = inputs[i][d] - inputs[j][d];
                    data.push(delta * delta);
                }
            }
        }
        Self { n, dim, data }
    }

    /// Builds `eps_f^2 exp(-1/2 sum_d dist2_d * inv_h2_d) + sigma_n^2 I`,
    /// filling the lower triangle only (all downstream consumers are the
    /// lower-triangular factorization and solves).
    fn covariance(&self, inv_h2: &[f64], eps_f: f64, sigma_n: f64) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(self.n, self.n);
        self.covariance_into(inv_h2, eps_f, sigma_n, &mut k);
        k
    }

    fn covariance_into(&self, inv_h2: &[f64], eps_f: f64, sigma_n: f64, k: &mut DMatrix<f64>) {
        debug_assert_eq!(k.nrows(), self.n);
        let eps2 = eps_f * eps_f;
        let noise = sigma_n * sigma_n;
        let mut idx = 0;
        for i in 0..self.n {
            for j in 0..=i {
                let chunk = &self.data[idx..idx + self.dim];
                idx += self.dim;
                let mut q = 0.0;
                for (d, &d2) in chunk.iter().enumerate() {
                    q += d2 * inv_h2[d];
                }
                k[(i, j)] = eps2 * (-0.5 * q).exp();
            }
            k[(i, i)] += noise;
        }
    }
}

/// Cholesky with an escalating diagonal jitter ladder, relative to the
/// signal variance: 1e-10, 1e-9, ..., 1e-6. Returns the lower factor and
/// the jitter that was applied (0 on first-try success).
fn cholesky_with_jitter(k: DMatrix<f64>, scale: f64) -> Option<(DMatrix<f64>, f64)> {
    if let Some(l) = blocked_cholesky(k.clone()) {
        return Some((l, 0.0));
    }
    let mut level = 1e-10;
    while level <= 1.0000001e-6 {
        let jitter = level * scale;
        let mut kj = k.clone();
        for i in 0..kj.nrows() {
            kj[(i, i)] += jitter;
        }
        if let Some(l) = blocked_cholesky(kj) {
            return Some((l, jitter));
        }
        level *= 10.0;
    }
    None
}

fn chol_solve(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut x = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    solve_lower_mut(l, &mut x);
    let mut data: Vec<f64> = x.as_slice().to_vec();
    solve_lower_transpose_mut(l, &mut data);
    DVector::from_vec(data)
}

/// Log marginal likelihood of the data under the given hyper-parameters
/// (zero prior mean; callers subtract any mean first).
pub fn log_marginal_likelihood(
    inputs: &[Vec<f64>],
    targets: &[f64],
    params: &KernelParams,
) -> Result<f64, GpError> {
    params.validate()?;
    let n = inputs.len();
    if n != targets.len() {
        return Err(GpError::DimensionMismatch {
            expected: n,
            got: targets.len(),
        });
    }
    let dim = params.h.len();
    let dist2 = PackedDistances::new(inputs, dim);
    let inv_h2: Vec<f64> = params.h.iter().map(|h| 1.0 / (h * h)).collect();
    let y = DVector::from_column_slice(targets);
    lml_from_distances(&dist2, &y, &inv_h2, params.eps_f, params.sigma_n)
        .ok_or(GpError::FactorizationFailed)
}

fn lml_from_distances(
    dist2: &PackedDistances,
    y: &DVector<f64>,
    inv_h2: &[f64],
    eps_f: f64,
    sigma_n: f64,
) -> Option<f64> {
    let n = y.len();
    let mut scratch = LmlScratch::new(n);
    lml_with_scratch(dist2, y, inv_h2, eps_f, sigma_n, &mut scratch)
}

/// Reusable buffers for repeated likelihood evaluations; allocating a
/// fresh covariance matrix per evaluation dominates the fit otherwise.
struct LmlScratch {
    k: DMatrix<f64>,
    z: DMatrix<f64>,
}

impl LmlScratch {
    fn new(n: usize) -> Self {
        Self {
            k: DMatrix::zeros(n, n),
            z: DMatrix::zeros(n, 1),
        }
    }
}

fn lml_with_scratch(
    dist2: &PackedDistances,
    y: &DVector<f64>,
    inv_h2: &[f64],
    eps_f: f64,
    sigma_n: f64,
    scratch: &mut LmlScratch,
) -> Option<f64> {
    let n = y.len();
    dist2.covariance_into(inv_h2, eps_f, sigma_n, &mut scratch.k);
    if !blocked_cholesky_in_place(&mut scratch.k) {
        return None;
    }
    let l = &scratch.k;
    let mut log_det_half = 0.0;
    for i in 0..n {
        let d = l[(i, i)];
        if !(d > 0.0) {
            return None;
        }
        log_det_half += d.ln();
    }
    // fit term y^T (L L^T)^-1 y = ||L^-1 y||^2
    scratch.z.column_mut(0).copy_from_slice(y.as_slice());
    solve_lower_mut(l, &mut scratch.z);
    let fit_term = scratch.z.as_slice().iter().map(|v| v * v).sum::<f64>();
    Some(-0.5 * fit_term - log_det_half - 0.5 * n as f64 * (std::f64::consts::TAU).ln())
}

/// Fits hyper-parameters by multi-start local maximization of the log
/// marginal likelihood in log space, then returns the surrogate in
/// original target units. Deterministic for a fixed config.
pub fn fit(
    inputs: &[Vec<f64>],
    targets: &[f64],
    cfg: &FitConfig,
) -> Result<GaussianSurrogate, GpError> {
    let n = inputs.len();
    if n < 2 {
        return Err(GpError::TooFewPoints(n));
    }
    if targets.len() != n {
        return Err(GpError::DimensionMismatch {
            expected: n,
            got: targets.len(),
        });
    }
    let dim = inputs[0].len();
    for w in inputs {
        if w.len() != dim {
            return Err(GpError::DimensionMismatch {
                expected: dim,
                got: w.len(),
            });
        }
    }

    let mean = targets.iter().sum::<f64>() / n as f64;
    let var = targets.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    let scale = mean.abs().max(1.0);
    if std < 1e-12 * scale {
        // All targets identical: constant-mean surrogate with a noise floor.
        log::debug!("degenerate training targets; returning constant-mean surrogate");
        let params = KernelParams {
            h: vec![1.0; dim],
            eps_f: 1e-3 * scale,
            sigma_n: 1e-4 * scale,
        };
        let mut g = GaussianSurrogate::with_params(inputs, targets, params, mean)?;
        g.degenerate_data = true;
        return Ok(g);
    }

    let standardized: Vec<f64> = targets.iter().map(|y| (y - mean) / std).collect();
    let y = DVector::from_column_slice(&standardized);
    let dist2 = PackedDistances::new(inputs, dim);

    let mut lo = vec![LOG_H_BOUNDS.0; dim];
    lo.push(LOG_EPS_BOUNDS.0);
    lo.push(LOG_SIGMA_BOUNDS.0);
    let mut hi = vec![LOG_H_BOUNDS.1; dim];
    hi.push(LOG_EPS_BOUNDS.1);
    hi.push(LOG_SIGMA_BOUNDS.1);

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.n_starts.max(1));
    if let Some(warm) = &cfg.warm_start {
        if warm.h.len() == dim {
            // Convert original-unit warm params into standardized units.
            let mut t: Vec<f64> = warm.h.iter().map(|h| h.ln()).collect();
            t.push((warm.eps_f / std).ln());
            t.push((warm.sigma_n / std).max(1e-300).ln());
            starts.push(clamp_into(&t, &lo, &hi));
        }
    }
    {
        let mut t = vec![0.5f64.ln(); dim];
        t.push(0.0);
        t.push(0.05f64.ln());
        starts.push(clamp_into(&t, &lo, &hi));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while starts.len() < cfg.n_starts.max(1) {
        let t: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(&a, &b)| rng.gen_range(a..b))
            .collect();
        starts.push(t);
    }

    // Per-start objective over log-parameters
    // [log h_1..log h_D, log eps_f, log sigma_n], with per-start scratch.
    // The first two starts (warm and heuristic) get the full evaluation
    // budget; the random scouts run leaner.
    let results: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .enumerate()
        .map(|(idx, start)| {
            let mut scratch = LmlScratch::new(n);
            let mut objective = |theta: &[f64]| -> f64 {
                let inv_h2: Vec<f64> =
                    theta[..dim].iter().map(|lh| (-2.0 * lh).exp()).collect();
                let eps_f = theta[dim].exp();
                let sigma_n = theta[dim + 1].exp();
                lml_with_scratch(&dist2, &y, &inv_h2, eps_f, sigma_n, &mut scratch)
                    .unwrap_or(f64::NEG_INFINITY)
            };
            let budget = if idx < 2 {
                cfg.max_evals_per_start
            } else {
                (3 * cfg.max_evals_per_start / 5).max(dim + 3)
            };
            nelder_mead_max(&mut objective, start, &lo, &hi, budget)
        })
        .collect();
    let best = results
        .into_iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.1.total_cmp(&b.1).then(ib.cmp(ia)))
        .map(|(_, r)| r)
        .expect("at least one start");

    let theta = best.0;
    let params = KernelParams {
        h: theta[..dim].iter().map(|lh| lh.exp()).collect(),
        eps_f: theta[dim].exp() * std,
        sigma_n: theta[dim + 1].exp() * std,
    };
    GaussianSurrogate::with_params(inputs, targets, params, mean)
}

fn clamp_into(t: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    t.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&v, (&a, &b))| v.clamp(a, b))
        .collect()
}

/// Nelder-Mead ascent inside a box; candidates are clamped to the bounds.
/// Returns the best vertex and its objective value.
fn nelder_mead_max(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    lo: &[f64],
    hi: &[f64],
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        -f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let x0 = clamp_into(start, lo, hi);
    let v0 = eval(&x0, &mut evals);
    simplex.push((x0.clone(), v0));
    for d in 0..dim {
        let mut x = x0.clone();
        let step = 0.10 * (hi[d] - lo[d]);
        x[d] = if x[d] + step <= hi[d] {
            x[d] + step
        } else {
            x[d] - step
        };
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        if spread.abs() < 1e-8 {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|d| simplex[..dim].iter().map(|(x, _)| x[d]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + alpha * (centroid[d] - worst.0[d]))
            .collect();
        let reflect = clamp_into(&reflect, lo, hi);
        let fr = eval(&reflect, &mut evals);
        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + gamma * (reflect[d] - centroid[d]))
                .collect();
            let expand = clamp_into(&expand, lo, hi);
            let fe = eval(&expand, &mut evals);
            simplex[dim] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + rho * (worst.0[d] - centroid[d]))
                .collect();
            let contract = clamp_into(&contract, lo, hi);
            let fc = eval(&contract, &mut evals);
            if fc < worst.1 {
                simplex[dim] = (contract, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = (0..dim)
                        .map(|d| best[d] + sigma * (v.0[d] - best[d]))
                        .collect();
                    let fx = eval(&x, &mut evals);
                    *v = (x, fx);
                    if evals >= max_evals {
                        break;
                    }
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, -v)
}
