//! Monte Carlo simulator of one DP-SGD step under an analytic gradient
//! inversion attack: builds the clipped, noised gradient observations of an
//! adversary-inserted linear layer, forms the sample-mean reconstruction,
//! and produces empirical error distributions for comparison against the
//! closed-form bounds.
//!
//! Non-contributory network parameters are modeled statistically through
//! `rest_norm`: noise on coordinates outside the attack layer never enters
//! the reconstruction, so only their norm contribution to the clipping term
//! is relevant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, RiskParams};
use crate::error::{Error, Result};

/// Reconstruction target: a fixed real vector with its Euclidean norm
/// cached at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetVector {
    entries: Vec<f64>,
    norm: f64,
}

impl TargetVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Shape("target must have at least one entry".into()));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("target entries must be finite".into()));
        }
        let norm = entries.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(Self { entries, norm })
    }

    /// Uniform-on-sphere direction scaled to the requested norm. Direction
    /// is irrelevant to the error law (the noise is isotropic), so this is
    /// the canonical synthetic target.
    pub fn random_on_sphere<R: Rng>(dimension: usize, norm: f64, rng: &mut R) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Shape("dimension must be >= 1".into()));
        }
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::Domain(format!(
                "target norm must be finite and > 0, got {norm}"
            )));
        }
        loop {
            let raw: Vec<f64> = (0..dimension).map(|_| rng.sample(StandardNormal)).collect();
            let raw_norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            if raw_norm > 0.0 {
                let entries = raw.iter().map(|x| x * norm / raw_norm).collect();
                return Self::new(entries);
            }
        }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value range max(X) - min(X), the peak signal used by the PSNR.
    pub fn range(&self) -> f64 {
        let max = self.entries.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.entries.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// Simulator knobs for one attack: linear-layer row count, DP-SGD clip norm
/// and noise multiplier, the norm of non-contributory gradient components,
/// the per-row loss derivatives, and the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    m_rows: usize,
    clip_norm: f64,
    sigma: f64,
    rest_norm: f64,
    loss_derivatives: Vec<f64>,
    include_bias_rows: bool,
    seed: u64,
}

impl AttackConfig {
    /// Default attack: all-ones loss derivatives, bias rows excluded from
    /// the global norm, no rest gradient, seed 0.
    pub fn new(m_rows: usize, clip_norm: f64, sigma: f64) -> Result<Self> {
        if m_rows < 1 {
            return Err(Error::Domain("attack needs at least one layer row".into()));
        }
        if !clip_norm.is_finite() || clip_norm <= 0.0 {
            return Err(Error::Domain(format!(
                "clip norm must be finite and > 0, got {clip_norm}"
            )));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::Domain(format!(
                "noise multiplier must be finite and > 0, got {sigma}"
            )));
        }
        Ok(Self {
            m_rows,
            clip_norm,
            sigma,
            rest_norm: 0.0,
            loss_derivatives: vec![1.0; m_rows],
            include_bias_rows: false,
            seed: 0,
        })
    }

    /// The variance-minimizing attack against targets of norm at least
    /// `min_norm`: row count `max(1, ceil(C/m))` and the uniform loss
    /// derivative `sqrt(C/m)`, which drives the global gradient norm to the
    /// clip threshold at exactly that row count. At and above it the
    /// per-coordinate reconstruction variance equals `sigma^2 ||X||^2`.
    pub fn optimal(clip_norm: f64, sigma: f64, min_norm: f64) -> Result<Self> {
        let m_rows = bounds::optimal_m(clip_norm, min_norm)? as usize;
        let derivative = (clip_norm / min_norm).sqrt();
        Self::new(m_rows, clip_norm, sigma)?.with_loss_derivatives(vec![derivative; m_rows])
    }

    pub fn with_rest_norm(mut self, rest_norm: f64) -> Result<Self> {
        if !rest_norm.is_finite() || rest_norm < 0.0 {
            return Err(Error::Domain(format!(
                "rest norm must be finite and >= 0, got {rest_norm}"
            )));
        }
        self.rest_norm = rest_norm;
        Ok(self)
    }

    pub fn with_loss_derivatives(mut self, derivatives: Vec<f64>) -> Result<Self> {
        if derivatives.len() != self.m_rows {
            return Err(Error::Shape(format!(
                "expected {} loss derivatives, got {}",
                self.m_rows,
                derivatives.len()
            )));
        }
        if derivatives.iter().any(|d| !d.is_finite()) {
            return Err(Error::Domain("loss derivatives must be finite".into()));
        }
        if derivatives.iter().all(|d| *d == 0.0) {
            return Err(Error::Domain(
                "at least one loss derivative must be non-zero for the reconstruction to be defined"
                    .into(),
            ));
        }
        self.loss_derivatives = derivatives;
        Ok(self)
    }

    pub fn with_bias_rows(mut self, include: bool) -> Self {
        self.include_bias_rows = include;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn m_rows(&self) -> usize {
        self.m_rows
    }

    pub fn clip_norm(&self) -> f64 {
        self.clip_norm
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rest_norm(&self) -> f64 {
        self.rest_norm
    }

    pub fn loss_derivatives(&self) -> &[f64] {
        &self.loss_derivatives
    }

    pub fn include_bias_rows(&self) -> bool {
        self.include_bias_rows
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// One privatized DP-SGD step as observed by the adversary: the noised
/// weight-row gradients, the noised bias derivatives, the true scaling
/// factors, and the clipping term that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivatizedStep {
    weight_rows: Vec<Vec<f64>>,
    bias_entries: Vec<f64>,
    true_scales: Vec<f64>,
    clip_factor: f64,
}

impl PrivatizedStep {
    pub fn weight_rows(&self) -> &[Vec<f64>] {
        &self.weight_rows
    }

    pub fn bias_entries(&self) -> &[f64] {
        &self.bias_entries
    }

    pub fn true_scales(&self) -> &[f64] {
        &self.true_scales
    }

    pub fn clip_factor(&self) -> f64 {
        self.clip_factor
    }

    pub fn m_rows(&self) -> usize {
        self.weight_rows.len()
    }

    pub fn dimension(&self) -> usize {
        self.weight_rows.first().map_or(0, Vec::len)
    }
}

/// Per-trial reconstruction errors with seed provenance. Rerunning with the
/// same seed and config reproduces the batch bit-identically, independent of
/// thread count.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialBatch {
    mse: Vec<f64>,
    psnr: Vec<f64>,
    seed: u64,
    config: AttackConfig,
}

impl TrialBatch {
    pub fn mse(&self) -> &[f64] {
        &self.mse
    }

    /// Per-trial PSNR; trials with exactly zero MSE carry the infinite
    /// sentinel and are excluded from summary statistics.
    pub fn psnr(&self) -> &[f64] {
        &self.psnr
    }

    pub fn trials(&self) -> usize {
        self.mse.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &AttackConfig {
        &self.config
    }

    pub fn mse_mean(&self) -> f64 {
        self.mse.iter().sum::<f64>() / self.mse.len() as f64
    }

    pub fn mse_quantile(&self, p: f64) -> f64 {
        let mut sorted = self.mse.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("MSE values are never NaN"));
        quantile_sorted(&sorted, p)
    }

    fn finite_psnr(&self) -> Vec<f64> {
        self.psnr.iter().copied().filter(|p| p.is_finite()).collect()
    }

    pub fn psnr_mean(&self) -> Option<f64> {
        let finite = self.finite_psnr();
        if finite.is_empty() {
            None
        } else {
            Some(finite.iter().sum::<f64>() / finite.len() as f64)
        }
    }

    pub fn psnr_quantile(&self, p: f64) -> Option<f64> {
        let mut finite = self.finite_psnr();
        if finite.is_empty() {
            return None;
        }
        finite.sort_by(|a, b| a.partial_cmp(b).expect("filtered to finite"));
        Some(quantile_sorted(&finite, p))
    }

    pub fn sentinel_count(&self) -> usize {
        self.psnr.iter().filter(|p| !p.is_finite()).count()
    }
}

// Order statistic with linear interpolation between ranks.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn check_simulatable(target: &TargetVector) -> Result<()> {
    if target.norm() <= 0.0 {
        return Err(Error::Domain(
            "simulation requires a target with positive norm".into(),
        ));
    }
    Ok(())
}

/// Norm of the global concatenated gradient: weight-row contributions, the
/// bias derivatives when enabled, and the rest gradient in quadrature.
pub fn global_gradient_norm(target: &TargetVector, config: &AttackConfig) -> Result<f64> {
    check_simulatable(target)?;
    let d_sq: f64 = config.loss_derivatives.iter().map(|d| d * d).sum();
    let mut norm_sq = d_sq * target.norm() * target.norm();
    if config.include_bias_rows {
        norm_sq += d_sq;
    }
    norm_sq += config.rest_norm * config.rest_norm;
    Ok(norm_sq.sqrt())
}

/// DP-SGD clipping term: 1 when the global gradient already fits the clip
/// norm, `C / ||G||` otherwise.
pub fn clip_factor(target: &TargetVector, config: &AttackConfig) -> Result<f64> {
    let norm = global_gradient_norm(target, config)?;
    Ok((config.clip_norm / norm).min(1.0))
}

/// Simulate one privatized DP-SGD step: every weight row observes
/// `s_j X + noise` and every bias entry `s_j + noise`, with per-coordinate
/// noise standard deviation `C * sigma` and `s_j` the clipping term times
/// the j-th loss derivative. Deterministic under a fixed RNG state.
pub fn privatize_step<R: Rng>(
    target: &TargetVector,
    config: &AttackConfig,
    rng: &mut R,
) -> Result<PrivatizedStep> {
    check_simulatable(target)?;
    let beta = clip_factor(target, config)?;
    let noise_sd = config.clip_norm * config.sigma;
    let true_scales: Vec<f64> = config.loss_derivatives.iter().map(|d| beta * d).collect();

    let weight_rows = true_scales
        .iter()
        .map(|s| {
            target
                .entries()
                .iter()
                .map(|x| s * x + noise_sd * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let bias_entries = true_scales
        .iter()
        .map(|s| s + noise_sd * rng.sample::<f64, _>(StandardNormal))
        .collect();

    Ok(PrivatizedStep {
        weight_rows,
        bias_entries,
        true_scales,
        clip_factor: beta,
    })
}

/// Sample-mean reconstruction: rescale each observed weight row by its
/// scale and average. With the true scales this is unbiased with
/// per-coordinate variance `(1/M^2) sum_j C^2 sigma^2 / s_j^2`.
pub fn reconstruct(step: &PrivatizedStep, scales: &[f64]) -> Result<TargetVector> {
    if scales.len() != step.m_rows() {
        return Err(Error::Shape(format!(
            "expected {} scales, got {}",
            step.m_rows(),
            scales.len()
        )));
    }
    if scales.iter().any(|s| *s == 0.0 || !s.is_finite()) {
        return Err(Error::ReconstructionUndefined(
            "every scale must be non-zero and finite to rescale the observations".into(),
        ));
    }
    let dim = step.dimension();
    let mut estimate = vec![0.0; dim];
    for (row, s) in step.weight_rows.iter().zip(scales) {
        for (acc, v) in estimate.iter_mut().zip(row) {
            *acc += v / s;
        }
    }
    let m = step.m_rows() as f64;
    for v in &mut estimate {
        *v /= m;
    }
    TargetVector::new(estimate)
}

/// Reconstruction under perfect scale knowledge, the worst case the bounds
/// certify against.
pub fn reconstruct_with_true_scales(step: &PrivatizedStep) -> Result<TargetVector> {
    reconstruct(step, &step.true_scales.clone())
}

/// Exact per-coordinate variance of the true-scale reconstruction for this
/// target and config: `(1/M^2) sum_j C^2 sigma^2 / s_j^2`.
pub fn estimator_variance(target: &TargetVector, config: &AttackConfig) -> Result<f64> {
    let beta = clip_factor(target, config)?;
    let noise_var = config.clip_norm * config.clip_norm * config.sigma * config.sigma;
    let mut sum = 0.0;
    for d in &config.loss_derivatives {
        let s = beta * d;
        if s == 0.0 {
            return Err(Error::ReconstructionUndefined(
                "zero scale in estimator variance".into(),
            ));
        }
        sum += noise_var / (s * s);
    }
    let m = config.m_rows as f64;
    Ok(sum / (m * m))
}

fn mse_between(target: &TargetVector, estimate: &TargetVector) -> f64 {
    let n = target.len() as f64;
    target
        .entries()
        .iter()
        .zip(estimate.entries())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n
}

fn psnr_from_mse(range: f64, mse: f64) -> f64 {
    if mse == 0.0 {
        // Exact-zero MSE has no finite PSNR; probability zero under the model.
        f64::INFINITY
    } else {
        10.0 * (range * range / mse).log10()
    }
}

/// Run independent attack trials against one target and record per-trial
/// MSE and PSNR. Trial `t` draws from its own RNG stream derived from
/// `(config seed, t)`, so the batch is reproducible bit-for-bit and
/// insensitive to parallel execution order.
pub fn run_trials(target: &TargetVector, config: &AttackConfig, trials: usize) -> Result<TrialBatch> {
    check_simulatable(target)?;
    if trials < 1 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let range = target.range();
    let results: Vec<Result<(f64, f64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(config.seed, trial);
            let step = privatize_step(target, config, &mut rng)?;
            let estimate = reconstruct_with_true_scales(&step)?;
            let mse = mse_between(target, &estimate);
            Ok((mse, psnr_from_mse(range, mse)))
        })
        .collect();

    let mut mse = Vec::with_capacity(trials);
    let mut psnr = Vec::with_capacity(trials);
    for r in results {
        let (m, p) = r?;
        mse.push(m);
        psnr.push(p);
    }
    Ok(TrialBatch {
        mse,
        psnr,
        seed: config.seed,
        config: config.clone(),
    })
}

/// Independent per-trial RNG stream: one ChaCha key per master seed, one
/// stream per trial index. The sampler + seed pair is part of the
/// reproducibility contract.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Average `k` reconstructions of the same target coordinate-wise. Over
/// repeated experiments the aggregate's per-coordinate variance decays as
/// `sigma^2 ||X||^2 / k`.
pub fn aggregate_reconstructions(estimates: &[TargetVector]) -> Result<TargetVector> {
    let first = estimates
        .first()
        .ok_or_else(|| Error::Shape("need at least one reconstruction to aggregate".into()))?;
    let dim = first.len();
    let mut acc = vec![0.0; dim];
    for estimate in estimates {
        if estimate.len() != dim {
            return Err(Error::Shape(format!(
                "reconstruction dimensions differ: {} vs {dim}",
                estimate.len()
            )));
        }
        for (a, v) in acc.iter_mut().zip(estimate.entries()) {
            *a += v;
        }
    }
    let k = estimates.len() as f64;
    for a in &mut acc {
        *a /= k;
    }
    TargetVector::new(acc)
}

/// Kolmogorov-Smirnov statistic of the batch's empirical MSE distribution
/// against the theoretical law for a target of the given norm: the supremum
/// distance to the scaled chi-squared CDF.
pub fn ks_statistic(batch: &TrialBatch, params: &RiskParams, target_norm: f64) -> Result<f64> {
    if batch.trials() == 0 {
        return Err(Error::Domain("KS statistic needs a non-empty batch".into()));
    }
    let mut sorted = batch.mse().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("MSE values are never NaN"));
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let cdf = bounds::mse_success_probability(params, target_norm, *x)?;
        let below = cdf - i as f64 / n;
        let above = (i + 1) as f64 / n - cdf;
        sup = sup.max(below).max(above);
    }
    Ok(sup)
}
