//! Closed-form risk bounds for analytic gradient inversion against a
//! Gaussian-mechanism DP-SGD step: reconstruction-robustness certificates
//! for MSE and PSNR, noise calibration to (eta, gamma) targets, the risk
//! corridor, optimal attack parameters and multi-attack variance decay.
//!
//! The optimal single-step attack reconstructs the target with coordinate
//! noise of variance `sigma^2 ||X||^2`, so its MSE follows a scaled
//! chi-squared law; every bound here is an evaluation or inversion of that
//! law through the regularized gamma function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun;

/// Privacy and attack context: target dimension, Gaussian-mechanism noise
/// multiplier, clip norm and the norm bounds of the protected dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskParams {
    dimension: u64,
    noise_multiplier: f64,
    clip_norm: f64,
    min_norm: f64,
    max_norm: Option<f64>,
    data_range: Option<f64>,
}

impl RiskParams {
    /// `min_norm` is the smallest Euclidean norm over the dataset with the
    /// zero vector excluded; the bounds are worst-case over that set.
    pub fn new(dimension: u64, noise_multiplier: f64, clip_norm: f64, min_norm: f64) -> Result<Self> {
        if dimension < 1 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        if !noise_multiplier.is_finite() || noise_multiplier <= 0.0 {
            return Err(Error::Domain(format!(
                "noise multiplier must be finite and > 0, got {noise_multiplier}"
            )));
        }
        if !clip_norm.is_finite() || clip_norm <= 0.0 {
            return Err(Error::Domain(format!(
                "clip norm must be finite and > 0, got {clip_norm}"
            )));
        }
        if !min_norm.is_finite() || min_norm <= 0.0 {
            return Err(Error::Domain(format!(
                "min norm must be finite and > 0 (zero vector is excluded from the dataset), got {min_norm}"
            )));
        }
        Ok(Self {
            dimension,
            noise_multiplier,
            clip_norm,
            min_norm,
            max_norm: None,
            data_range: None,
        })
    }

    /// Largest dataset norm, for per-target queries.
    pub fn with_max_norm(mut self, max_norm: f64) -> Result<Self> {
        if !max_norm.is_finite() || max_norm < self.min_norm {
            return Err(Error::Domain(format!(
                "max norm must be finite and >= min norm {}, got {max_norm}",
                self.min_norm
            )));
        }
        self.max_norm = Some(max_norm);
        Ok(self)
    }

    /// Dataset value range (max entry over the dataset minus min entry),
    /// required by the PSNR bound.
    pub fn with_data_range(mut self, data_range: f64) -> Result<Self> {
        if !data_range.is_finite() || data_range < 0.0 {
            return Err(Error::Domain(format!(
                "data range must be finite and >= 0, got {data_range}"
            )));
        }
        self.data_range = Some(data_range);
        Ok(self)
    }

    pub fn dimension(&self) -> u64 {
        self.dimension
    }

    pub fn noise_multiplier(&self) -> f64 {
        self.noise_multiplier
    }

    pub fn clip_norm(&self) -> f64 {
        self.clip_norm
    }

    pub fn min_norm(&self) -> f64 {
        self.min_norm
    }

    pub fn max_norm(&self) -> Option<f64> {
        self.max_norm
    }

    pub fn data_range(&self) -> Option<f64> {
        self.data_range
    }
}

/// Reconstruction-quality metric a certificate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mse,
    NegPsnr,
    Ncc,
}

/// Direction of the certified event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `gamma` bounds the probability that the error is at most `eta`.
    ErrorAtMostEta,
    /// `gamma` bounds the probability that the score is at least `eta`.
    ScoreAtLeastEta,
}

/// An (eta, gamma) reconstruction-robustness certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReRoResult {
    pub metric: Metric,
    pub eta: f64,
    pub gamma: f64,
    pub direction: Direction,
}

/// The interval `[0, eta_upper]` of reconstruction errors that a
/// candidate-set adversary saves over a from-scratch adversary at equal
/// success probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskCorridor {
    pub eta_upper: f64,
}

impl RiskCorridor {
    pub fn contains(&self, eta: f64) -> bool {
        (0.0..=self.eta_upper).contains(&eta)
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::Domain(format!(
            "error threshold eta must be finite and >= 0, got {eta}"
        )));
    }
    Ok(())
}

fn check_gamma_open(gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma <= 0.0 || gamma >= 1.0 {
        return Err(Error::Domain(format!(
            "gamma must lie strictly inside (0, 1), got {gamma}"
        )));
    }
    Ok(())
}

/// Probability that the optimal attack's MSE against a target of the given
/// norm is at most `eta`: the CDF of the scaled chi-squared error law.
///
/// Zero at `eta = 0`: a perfect reconstruction has probability zero under
/// any positive noise.
pub fn mse_success_probability(params: &RiskParams, target_norm: f64, eta: f64) -> Result<f64> {
    if !target_norm.is_finite() || target_norm <= 0.0 {
        return Err(Error::Domain(format!(
            "target norm must be finite and > 0 (zero vector excluded), got {target_norm}"
        )));
    }
    check_eta(eta)?;
    let n = params.dimension as f64;
    let sigma = params.noise_multiplier;
    let x = n * eta / (2.0 * sigma * sigma * target_norm * target_norm);
    specfun::regularized_gamma_p(n / 2.0, x)
}

/// Dataset-level MSE certificate: `gamma` bounds the success probability of
/// any analytic inversion attack against every target with norm at least
/// the configured minimum.
pub fn rero_gamma_mse(params: &RiskParams, eta: f64) -> Result<ReRoResult> {
    let gamma = mse_success_probability(params, params.min_norm, eta)?;
    Ok(ReRoResult {
        metric: Metric::Mse,
        eta,
        gamma,
        direction: Direction::ErrorAtMostEta,
    })
}

/// MSE threshold at which the dataset-level certificate equals `gamma`;
/// inverts `rero_gamma_mse` in its threshold argument.
pub fn eta_from_gamma(params: &RiskParams, gamma: f64) -> Result<f64> {
    check_gamma_open(gamma)?;
    let n = params.dimension as f64;
    let sigma = params.noise_multiplier;
    let m = params.min_norm;
    let inv = specfun::inverse_regularized_gamma_p(n / 2.0, gamma)?;
    Ok(2.0 * sigma * sigma / n * m * m * inv)
}

/// Noise multiplier that makes the dataset-level certificate hit the
/// requested (eta, gamma) target.
pub fn sigma_from_eta_gamma(dimension: u64, min_norm: f64, eta: f64, gamma: f64) -> Result<f64> {
    if dimension < 1 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    if !min_norm.is_finite() || min_norm <= 0.0 {
        return Err(Error::Domain(format!(
            "min norm must be finite and > 0, got {min_norm}"
        )));
    }
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::Domain(format!(
            "eta must be finite and > 0 for calibration, got {eta}"
        )));
    }
    check_gamma_open(gamma)?;
    let n = dimension as f64;
    let inv = specfun::inverse_regularized_gamma_p(n / 2.0, gamma)?;
    Ok((n * eta / (2.0 * min_norm * min_norm * inv)).sqrt())
}

/// PSNR exceedance certificate: `gamma` bounds the probability that the
/// attack's PSNR reaches at least `eta_db` against any non-zero target.
/// The dB threshold is mapped to the equivalent MSE threshold
/// `10^(-eta_db/10) * range^2` and fed through the MSE law.
pub fn psnr_exceedance_bound(params: &RiskParams, eta_db: f64) -> Result<ReRoResult> {
    let range = params.data_range.ok_or_else(|| {
        Error::Config("data range is required for the PSNR bound but was not set".into())
    })?;
    if !eta_db.is_finite() {
        return Err(Error::Domain(format!(
            "eta_db must be finite, got {eta_db}"
        )));
    }
    let eta_mse = psnr_db_to_mse_threshold(eta_db, range);
    let gamma = if eta_mse == 0.0 {
        0.0
    } else {
        mse_success_probability(params, params.min_norm, eta_mse)?
    };
    Ok(ReRoResult {
        metric: Metric::NegPsnr,
        eta: eta_db,
        gamma,
        direction: Direction::ScoreAtLeastEta,
    })
}

/// MSE threshold equivalent to a PSNR of `eta_db` at the given value range:
/// the events {PSNR >= eta_db} and {MSE <= threshold} coincide.
pub fn psnr_db_to_mse_threshold(eta_db: f64, range: f64) -> f64 {
    10f64.powf(-eta_db / 10.0) * range * range
}

/// Expected MSE of the optimal attack (the estimator's mean squared error
/// floor): `sigma^2 * ||X||^2`.
pub fn expected_mse(sigma: f64, target_norm: f64) -> f64 {
    sigma * sigma * target_norm * target_norm
}

/// Smallest row count for which the inserted linear layer drives the
/// clipped gradient norm to the clip threshold: `max(1, ceil(C/m))`.
pub fn optimal_m(clip_norm: f64, min_norm: f64) -> Result<u64> {
    if !clip_norm.is_finite() || clip_norm <= 0.0 {
        return Err(Error::Domain(format!(
            "clip norm must be finite and > 0, got {clip_norm}"
        )));
    }
    if !min_norm.is_finite() || min_norm <= 0.0 {
        return Err(Error::Domain(format!(
            "min norm must be finite and > 0 (zero vector excluded), got {min_norm}"
        )));
    }
    Ok(((clip_norm / min_norm).ceil() as u64).max(1))
}

/// Per-coordinate variance after averaging `k` independent optimal
/// reconstructions of the same target: `sigma^2 * ||X||^2 / k`.
pub fn multi_attack_variance(sigma: f64, target_norm: f64, k: u32) -> f64 {
    debug_assert!(k >= 1);
    expected_mse(sigma, target_norm) / k as f64
}

/// Normalized cross-correlation between a target and its optimal
/// reconstruction. With the target's empirical variance `var_x` supplied the
/// value is exact; without it the dimension-only upper bound
/// `sqrt(1 / (1 + sigma^2 N))` is returned.
pub fn ncc_bound(sigma: f64, target_norm: f64, dimension: u64, var_x: Option<f64>) -> Result<f64> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::Domain(format!(
            "noise multiplier must be finite and > 0, got {sigma}"
        )));
    }
    if dimension < 1 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    match var_x {
        Some(v) => {
            if !target_norm.is_finite() || target_norm <= 0.0 {
                return Err(Error::Domain(format!(
                    "target norm must be finite and > 0, got {target_norm}"
                )));
            }
            let cap = target_norm * target_norm / dimension as f64;
            // Tiny slack absorbs rounding when callers pass exactly ||X||^2/N.
            if !v.is_finite() || v <= 0.0 || v > cap * (1.0 + 1e-12) {
                return Err(Error::Domain(format!(
                    "var_x must satisfy 0 < var_x <= ||X||^2 / N = {cap} \
                     (a vector's entry variance cannot exceed its mean squared entry), got {v}"
                )));
            }
            let noise_var = sigma * sigma * target_norm * target_norm;
            Ok((1.0 / (1.0 + noise_var / v)).sqrt())
        }
        None => {
            let n = dimension as f64;
            Ok((1.0 / (1.0 + sigma * sigma * n)).sqrt())
        }
    }
}

/// Risk corridor `[0, eta(gamma_prior)]`: the upper end is the error a
/// from-scratch adversary must tolerate to match the success probability
/// `gamma_prior` that a candidate-set bound grants at zero error.
pub fn risk_corridor(params: &RiskParams, gamma_prior: f64) -> Result<RiskCorridor> {
    let eta_upper = eta_from_gamma(params, gamma_prior)?;
    Ok(RiskCorridor { eta_upper })
}
