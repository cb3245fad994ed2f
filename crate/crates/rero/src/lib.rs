//! Reconstruction-risk analysis for DP-SGD against analytic gradient
//! inversion attacks.
//!
//! The crate has three layers:
//!
//! * [`specfun`] - the regularized lower incomplete gamma function, its
//!   inverse, and chi-squared helpers; the numerical substrate of every
//!   bound.
//! * [`bounds`] - closed-form (eta, gamma) reconstruction-robustness
//!   certificates for MSE and PSNR, Gaussian-noise calibration to a chosen
//!   risk target, the risk corridor against candidate-set adversaries,
//!   optimal attack parameters and multi-attack variance decay.
//! * [`mechanism`] - a Monte Carlo simulator of the attack on one DP-SGD
//!   step, used to validate the bounds' tightness empirically.
//!
//! All operations are pure functions over immutable inputs; simulation
//! trials run on independent, index-derived RNG streams and are safe to
//! parallelize.

pub mod bounds;
pub mod error;
pub mod mechanism;
pub mod specfun;

pub use bounds::{Direction, Metric, ReRoResult, RiskCorridor, RiskParams};
pub use error::{Error, Result};
pub use mechanism::{AttackConfig, PrivatizedStep, TargetVector, TrialBatch};
