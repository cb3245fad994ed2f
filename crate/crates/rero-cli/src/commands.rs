//! Subcommand implementations. Every command is a thin adapter: it resolves
//! flags against the config file, calls the library, and renders the result
//! losslessly as table rows.

use std::path::PathBuf;

use rero::bounds::{self, rero_gamma_mse, RiskParams};
use rero::mechanism::{self, AttackConfig, TargetVector, TrialBatch};
use rero::specfun;

use crate::args::{
    BoundArgs, CalibrateArgs, CorridorArgs, MetricArg, SimulateArgs, SweepArgs,
};
use crate::config::ConfigMap;
use crate::output::{Cell, Row};

type CmdResult = Result<Vec<Row>, String>;

fn lib_err(e: rero::Error) -> String {
    e.to_string()
}

fn require<T>(value: Option<T>, flag: &str, what: &str) -> Result<T, String> {
    value.ok_or_else(|| format!("missing --{flag}: {what}"))
}

// RiskParams with the clip norm defaulted to 1; none of the closed-form
// bounds read it, but the parameter record requires a positive value.
fn risk_params(n: u64, sigma: f64, clip_norm: Option<f64>, min_norm: f64) -> Result<RiskParams, String> {
    RiskParams::new(n, sigma, clip_norm.unwrap_or(1.0), min_norm).map_err(lib_err)
}

pub fn run_bound(args: BoundArgs, cfg: &ConfigMap) -> CmdResult {
    let metric = match args.metric {
        Some(m) => m,
        None => match cfg.raw("metric") {
            Some("mse") | None => MetricArg::Mse,
            Some("psnr") => MetricArg::Psnr,
            Some(other) => return Err(format!("config key 'metric': expected mse or psnr, got '{other}'")),
        },
    };
    let n = require(cfg.u64("n", args.n)?, "n", "target dimension (>= 1)")?;
    let sigma = require(cfg.f64("sigma", args.sigma)?, "sigma", "noise multiplier (> 0)")?;
    let min_norm = require(
        cfg.f64("min-norm", args.min_norm)?,
        "min-norm",
        "smallest dataset norm excluding the zero vector (> 0)",
    )?;
    let clip_norm = cfg.f64("clip-norm", args.clip_norm)?;
    let params = risk_params(n, sigma, clip_norm, min_norm)?;

    match metric {
        MetricArg::Mse => {
            let eta = require(
                cfg.f64("eta", args.eta)?,
                "eta",
                "MSE threshold (>= 0) for the mse metric",
            )?;
            let r = rero_gamma_mse(&params, eta).map_err(lib_err)?;
            Ok(vec![vec![
                ("metric", "mse".into()),
                ("n", n.into()),
                ("sigma", sigma.into()),
                ("min_norm", min_norm.into()),
                ("eta", eta.into()),
                ("gamma", r.gamma.into()),
                ("direction", "error_at_most_eta".into()),
            ]])
        }
        MetricArg::Psnr => {
            let eta_db = require(
                cfg.f64("eta-db", args.eta_db)?,
                "eta-db",
                "PSNR threshold in dB for the psnr metric",
            )?;
            let data_range = require(
                cfg.f64("data-range", args.data_range)?,
                "data-range",
                "dataset value range (max entry - min entry) for the psnr metric",
            )?;
            let params = params.with_data_range(data_range).map_err(lib_err)?;
            let r = bounds::psnr_exceedance_bound(&params, eta_db).map_err(lib_err)?;
            Ok(vec![vec![
                ("metric", "neg_psnr".into()),
                ("n", n.into()),
                ("sigma", sigma.into()),
                ("min_norm", min_norm.into()),
                ("data_range", data_range.into()),
                ("eta_db", eta_db.into()),
                ("gamma", r.gamma.into()),
                ("direction", "score_at_least_eta".into()),
            ]])
        }
    }
}

pub fn run_calibrate(args: CalibrateArgs, cfg: &ConfigMap) -> CmdResult {
    let n = require(cfg.u64("n", args.n)?, "n", "target dimension (>= 1)")?;
    let min_norm = require(
        cfg.f64("min-norm", args.min_norm)?,
        "min-norm",
        "smallest dataset norm excluding the zero vector (> 0)",
    )?;
    let eta = require(cfg.f64("eta", args.eta)?, "eta", "MSE threshold (> 0)")?;
    let gamma = require(
        cfg.f64("gamma", args.gamma)?,
        "gamma",
        "success probability target strictly inside (0, 1)",
    )?;
    let sigma = bounds::sigma_from_eta_gamma(n, min_norm, eta, gamma).map_err(lib_err)?;
    Ok(vec![vec![
        ("n", n.into()),
        ("min_norm", min_norm.into()),
        ("eta", eta.into()),
        ("gamma", gamma.into()),
        ("sigma", sigma.into()),
    ]])
}

pub fn run_corridor(args: CorridorArgs, cfg: &ConfigMap) -> CmdResult {
    let n = require(cfg.u64("n", args.n)?, "n", "target dimension (>= 1)")?;
    let sigma = require(cfg.f64("sigma", args.sigma)?, "sigma", "noise multiplier (> 0)")?;
    let min_norm = require(
        cfg.f64("min-norm", args.min_norm)?,
        "min-norm",
        "smallest dataset norm excluding the zero vector (> 0)",
    )?;
    let gamma_prior = require(
        cfg.f64("gamma-prior", args.gamma_prior)?,
        "gamma-prior",
        "success probability of the identification-based bound, strictly inside (0, 1)",
    )?;
    let clip_norm = cfg.f64("clip-norm", args.clip_norm)?;
    let params = risk_params(n, sigma, clip_norm, min_norm)?;
    let corridor = bounds::risk_corridor(&params, gamma_prior).map_err(lib_err)?;
    Ok(vec![vec![
        ("n", n.into()),
        ("sigma", sigma.into()),
        ("min_norm", min_norm.into()),
        ("gamma_prior", gamma_prior.into()),
        ("eta_lower", 0.0.into()),
        ("eta_upper", corridor.eta_upper.into()),
    ]])
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("{what}: cannot parse '{}' as a real number", s.trim()))
        })
        .collect()
}

/// Target spec: an explicit `--target` vector, or a synthetic
/// uniform-on-sphere target from `--n` and `--norm` drawn on an RNG stream
/// reserved apart from the trial streams.
fn resolve_target(
    target: Option<String>,
    n: Option<usize>,
    norm: Option<f64>,
    seed: u64,
    cfg: &ConfigMap,
) -> Result<TargetVector, String> {
    let target = cfg.string("target", target);
    let n = cfg.usize("n", n)?;
    let norm = cfg.f64("norm", norm)?;
    match (target, n, norm) {
        (Some(text), None, None) => {
            let entries = parse_f64_list(&text, "--target")?;
            TargetVector::new(entries).map_err(lib_err)
        }
        (Some(_), _, _) => Err("--target conflicts with --n/--norm; give one target spec".into()),
        (None, Some(n), Some(norm)) => {
            let mut rng = mechanism::trial_rng(seed, u64::MAX);
            TargetVector::random_on_sphere(n, norm, &mut rng).map_err(lib_err)
        }
        _ => Err("missing target spec: give --target, or --n with --norm for a synthetic target".into()),
    }
}

struct SimInputs {
    target: TargetVector,
    config: AttackConfig,
    trials: usize,
}

// A single loss derivative broadcasts to every row.
fn broadcast_derivatives(values: Vec<f64>, m_rows: usize) -> Vec<f64> {
    if values.len() == 1 && m_rows > 1 {
        vec![values[0]; m_rows]
    } else {
        values
    }
}

fn resolve_sim_inputs(args: &SimulateArgs, cfg: &ConfigMap) -> Result<SimInputs, String> {
    let seed = cfg.u64("seed", args.seed)?.unwrap_or(0);
    let target = resolve_target(args.target.clone(), args.n, args.norm, seed, cfg)?;
    let m_rows = cfg.usize("m-rows", args.m_rows)?.unwrap_or(1);
    let clip_norm = cfg.f64("clip-norm", args.clip_norm)?.unwrap_or(1.0);
    let sigma = require(cfg.f64("sigma", args.sigma)?, "sigma", "noise multiplier (> 0)")?;
    let rest_norm = cfg.f64("rest-norm", args.rest_norm)?.unwrap_or(0.0);
    let bias_rows = cfg.bool("bias-rows", args.bias_rows)?;
    let trials = cfg.usize("trials", args.trials)?.unwrap_or(500);

    let mut config = AttackConfig::new(m_rows, clip_norm, sigma)
        .map_err(lib_err)?
        .with_rest_norm(rest_norm)
        .map_err(lib_err)?
        .with_bias_rows(bias_rows)
        .with_seed(seed);
    if let Some(text) = cfg.string("loss-derivatives", args.loss_derivatives.clone()) {
        let derivatives = parse_f64_list(&text, "--loss-derivatives")?;
        config = config
            .with_loss_derivatives(broadcast_derivatives(derivatives, m_rows))
            .map_err(lib_err)?;
    }
    Ok(SimInputs {
        target,
        config,
        trials,
    })
}

fn simulate_summary_row(target: &TargetVector, batch: &TrialBatch) -> Result<Row, String> {
    let config = batch.config();
    let n = target.len() as u64;
    let sigma = config.sigma();
    let norm = target.norm();
    let range = target.range();

    // Theoretical counterparts from the optimal-attack error law: MSE is a
    // chi-squared draw scaled by sigma^2 ||X||^2 / N.
    let law_scale = sigma * sigma * norm * norm / n as f64;
    let theo_mean = bounds::expected_mse(sigma, norm);
    let theo_q = |p: f64| -> Result<f64, String> {
        Ok(law_scale * specfun::chi_squared_quantile(n, p).map_err(lib_err)?)
    };
    let theo_q25 = theo_q(0.25)?;
    let theo_q50 = theo_q(0.5)?;
    let theo_q75 = theo_q(0.75)?;
    let theo_psnr = |mse: f64| {
        if mse == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (range * range / mse).log10()
        }
    };

    let params = risk_params(n, sigma, Some(config.clip_norm()), norm)?;
    let ks = mechanism::ks_statistic(batch, &params, norm).map_err(lib_err)?;

    let opt = |v: Option<f64>| v.unwrap_or(f64::INFINITY);
    Ok(vec![
        ("n", n.into()),
        ("m_rows", (config.m_rows() as u64).into()),
        ("clip_norm", config.clip_norm().into()),
        ("sigma", sigma.into()),
        ("rest_norm", config.rest_norm().into()),
        ("target_norm", norm.into()),
        ("target_range", range.into()),
        ("trials", (batch.trials() as u64).into()),
        ("seed", batch.seed().into()),
        ("mse_mean", batch.mse_mean().into()),
        ("mse_q25", batch.mse_quantile(0.25).into()),
        ("mse_q50", batch.mse_quantile(0.5).into()),
        ("mse_q75", batch.mse_quantile(0.75).into()),
        ("psnr_mean", opt(batch.psnr_mean()).into()),
        ("psnr_q25", opt(batch.psnr_quantile(0.25)).into()),
        ("psnr_q50", opt(batch.psnr_quantile(0.5)).into()),
        ("psnr_q75", opt(batch.psnr_quantile(0.75)).into()),
        ("psnr_sentinels", (batch.sentinel_count() as u64).into()),
        ("theo_mse_mean", theo_mean.into()),
        ("theo_mse_q25", theo_q25.into()),
        ("theo_mse_q50", theo_q50.into()),
        ("theo_mse_q75", theo_q75.into()),
        // PSNR falls as MSE grows, so the quartiles swap ends.
        ("theo_psnr_q25", theo_psnr(theo_q75).into()),
        ("theo_psnr_q50", theo_psnr(theo_q50).into()),
        ("theo_psnr_q75", theo_psnr(theo_q25).into()),
        ("ks_stat", ks.into()),
    ])
}

fn write_trial_dump(path: &PathBuf, batch: &TrialBatch) -> Result<(), String> {
    let file = std::fs::File::create(path)
        .map_err(|e| format!("cannot create dump file {}: {e}", path.display()))?;
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record(["trial", "mse", "psnr"])
        .map_err(|e| e.to_string())?;
    for (i, (mse, psnr)) in batch.mse().iter().zip(batch.psnr()).enumerate() {
        writer
            .write_record([
                i.to_string(),
                crate::output::fmt_f64(*mse),
                crate::output::fmt_f64(*psnr),
            ])
            .map_err(|e| e.to_string())?;
    }
    writer.flush().map_err(|e| e.to_string())
}

pub fn run_simulate(args: SimulateArgs, cfg: &ConfigMap) -> CmdResult {
    let inputs = resolve_sim_inputs(&args, cfg)?;
    let batch = mechanism::run_trials(&inputs.target, &inputs.config, inputs.trials).map_err(lib_err)?;
    if let Some(path) = &args.dump {
        write_trial_dump(path, &batch)?;
    }
    Ok(vec![simulate_summary_row(&inputs.target, &batch)?])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepVariable {
    Sigma,
    Eta,
    Gamma,
    M,
    RestNorm,
}

impl SweepVariable {
    fn parse(text: &str) -> Result<Self, String> {
        match text {
            "sigma" => Ok(Self::Sigma),
            "eta" => Ok(Self::Eta),
            "gamma" => Ok(Self::Gamma),
            "m" => Ok(Self::M),
            "rest-norm" => Ok(Self::RestNorm),
            other => Err(format!(
                "--variable must be one of sigma|eta|gamma|m|rest-norm, got '{other}'"
            )),
        }
    }

    fn column(self) -> &'static str {
        match self {
            Self::Sigma => "sigma",
            Self::Eta => "eta",
            Self::Gamma => "gamma",
            Self::M => "m_rows",
            Self::RestNorm => "rest_norm",
        }
    }

    fn flag(self) -> &'static str {
        match self {
            Self::Sigma => "sigma",
            Self::Eta => "eta",
            Self::Gamma => "gamma",
            Self::M => "m-rows",
            Self::RestNorm => "rest-norm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepEmit {
    Gamma,
    Sigma,
    Eta,
    Mse,
}

impl SweepEmit {
    fn parse(text: &str) -> Result<Self, String> {
        match text {
            "gamma" => Ok(Self::Gamma),
            "sigma" => Ok(Self::Sigma),
            "eta" => Ok(Self::Eta),
            "mse" => Ok(Self::Mse),
            other => Err(format!(
                "--emit must be one of gamma|sigma|eta|mse, got '{other}'"
            )),
        }
    }
}

/// Grid syntax: an explicit comma list, `lin:start:stop:count`, or
/// `log:start:stop:count`. Values must be finite and strictly increasing.
fn parse_grid(text: &str, variable: SweepVariable) -> Result<Vec<f64>, String> {
    let values = if let Some(spec) = text.strip_prefix("lin:") {
        spaced_grid(spec, false)?
    } else if let Some(spec) = text.strip_prefix("log:") {
        spaced_grid(spec, true)?
    } else {
        parse_f64_list(text, "--grid")?
    };
    if values.is_empty() {
        return Err("--grid must contain at least one value".into());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err("--grid values must be finite".into());
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err("--grid values must be strictly increasing".into());
    }
    if variable == SweepVariable::M
        && values.iter().any(|v| v.fract() != 0.0 || *v < 1.0)
    {
        return Err("--grid for variable m must contain integers >= 1".into());
    }
    Ok(values)
}

fn spaced_grid(spec: &str, log: bool) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(format!(
            "grid spec must be {}:start:stop:count, got '{spec}'",
            if log { "log" } else { "lin" }
        ));
    };
    let start: f64 = start.parse().map_err(|_| format!("bad grid start '{start}'"))?;
    let stop: f64 = stop.parse().map_err(|_| format!("bad grid stop '{stop}'"))?;
    let count: usize = count.parse().map_err(|_| format!("bad grid count '{count}'"))?;
    if count < 2 {
        return Err("grid count must be >= 2".into());
    }
    if log && (start <= 0.0 || stop <= 0.0) {
        return Err("log grids need positive endpoints".into());
    }
    let (a, b) = if log { (start.ln(), stop.ln()) } else { (start, stop) };
    Ok((0..count)
        .map(|i| {
            let t = a + (b - a) * i as f64 / (count - 1) as f64;
            if log {
                t.exp()
            } else {
                t
            }
        })
        .collect())
}

pub fn run_sweep(args: SweepArgs, cfg: &ConfigMap) -> CmdResult {
    let variable = SweepVariable::parse(&require(
        cfg.string("variable", args.variable.clone()),
        "variable",
        "swept variable (sigma|eta|gamma|m|rest-norm)",
    )?)?;
    let emit = SweepEmit::parse(&require(
        cfg.string("emit", args.emit.clone()),
        "emit",
        "emitted quantity per grid point (gamma|sigma|eta|mse)",
    )?)?;
    let grid = parse_grid(
        &require(
            cfg.string("grid", args.grid.clone()),
            "grid",
            "grid of values for the swept variable",
        )?,
        variable,
    )?;

    // The swept variable must not also be fixed by a flag.
    let duplicated = match variable {
        SweepVariable::Sigma => args.sigma.is_some(),
        SweepVariable::Eta => args.eta.is_some(),
        SweepVariable::Gamma => args.gamma.is_some(),
        SweepVariable::M => args.m_rows.is_some(),
        SweepVariable::RestNorm => args.rest_norm.is_some(),
    };
    if duplicated {
        return Err(format!(
            "--{} is the swept variable; its values come from --grid, not a fixed flag",
            variable.flag()
        ));
    }

    let rows = match emit {
        SweepEmit::Gamma => sweep_gamma(&args, cfg, variable, &grid)?,
        SweepEmit::Sigma => sweep_sigma(&args, cfg, variable, &grid)?,
        SweepEmit::Eta => sweep_eta(&args, cfg, variable, &grid)?,
        SweepEmit::Mse => sweep_mse(&args, cfg, variable, &grid)?,
    };

    if let Some(text) = cfg.string("columns", args.columns.clone()) {
        let columns: Vec<String> = text.split(',').map(|s| s.trim().to_string()).collect();
        return crate::output::select_columns(rows, &columns);
    }
    Ok(rows)
}

fn sweep_gamma(args: &SweepArgs, cfg: &ConfigMap, variable: SweepVariable, grid: &[f64]) -> CmdResult {
    let n = require(cfg.u64("n", args.n.map(|v| v as u64))?, "n", "target dimension")?;
    let min_norm = require(cfg.f64("min-norm", args.min_norm)?, "min-norm", "smallest dataset norm")?;
    let clip_norm = cfg.f64("clip-norm", args.clip_norm)?;
    match variable {
        SweepVariable::Sigma => {
            let eta = require(cfg.f64("eta", args.eta)?, "eta", "fixed MSE threshold")?;
            grid.iter()
                .map(|&sigma| {
                    let params = risk_params(n, sigma, clip_norm, min_norm)?;
                    let gamma = rero_gamma_mse(&params, eta).map_err(lib_err)?.gamma;
                    Ok(vec![
                        ("sigma", sigma.into()),
                        ("eta", eta.into()),
                        ("gamma", gamma.into()),
                    ])
                })
                .collect()
        }
        SweepVariable::Eta => {
            let sigma = require(cfg.f64("sigma", args.sigma)?, "sigma", "fixed noise multiplier")?;
            let params = risk_params(n, sigma, clip_norm, min_norm)?;
            grid.iter()
                .map(|&eta| {
                    let gamma = rero_gamma_mse(&params, eta).map_err(lib_err)?.gamma;
                    Ok(vec![
                        ("eta", eta.into()),
                        ("sigma", sigma.into()),
                        ("gamma", gamma.into()),
                    ])
                })
                .collect()
        }
        other => Err(format!(
            "emit gamma supports variable sigma or eta, not {}",
            other.column()
        )),
    }
}

fn sweep_sigma(args: &SweepArgs, cfg: &ConfigMap, variable: SweepVariable, grid: &[f64]) -> CmdResult {
    let n = require(cfg.u64("n", args.n.map(|v| v as u64))?, "n", "target dimension")?;
    let min_norm = require(cfg.f64("min-norm", args.min_norm)?, "min-norm", "smallest dataset norm")?;
    match variable {
        SweepVariable::Eta => {
            let gamma = require(cfg.f64("gamma", args.gamma)?, "gamma", "fixed success probability")?;
            grid.iter()
                .map(|&eta| {
                    let sigma = bounds::sigma_from_eta_gamma(n, min_norm, eta, gamma).map_err(lib_err)?;
                    Ok(vec![
                        ("eta", eta.into()),
                        ("gamma", gamma.into()),
                        ("sigma", sigma.into()),
                    ])
                })
                .collect()
        }
        SweepVariable::Gamma => {
            let eta = require(cfg.f64("eta", args.eta)?, "eta", "fixed MSE threshold")?;
            grid.iter()
                .map(|&gamma| {
                    let sigma = bounds::sigma_from_eta_gamma(n, min_norm, eta, gamma).map_err(lib_err)?;
                    Ok(vec![
                        ("gamma", gamma.into()),
                        ("eta", eta.into()),
                        ("sigma", sigma.into()),
                    ])
                })
                .collect()
        }
        other => Err(format!(
            "emit sigma supports variable eta or gamma, not {}",
            other.column()
        )),
    }
}

fn sweep_eta(args: &SweepArgs, cfg: &ConfigMap, variable: SweepVariable, grid: &[f64]) -> CmdResult {
    let n = require(cfg.u64("n", args.n.map(|v| v as u64))?, "n", "target dimension")?;
    let min_norm = require(cfg.f64("min-norm", args.min_norm)?, "min-norm", "smallest dataset norm")?;
    let clip_norm = cfg.f64("clip-norm", args.clip_norm)?;
    match variable {
        SweepVariable::Gamma => {
            let sigma = require(cfg.f64("sigma", args.sigma)?, "sigma", "fixed noise multiplier")?;
            let params = risk_params(n, sigma, clip_norm, min_norm)?;
            grid.iter()
                .map(|&gamma| {
                    let eta = bounds::eta_from_gamma(&params, gamma).map_err(lib_err)?;
                    Ok(vec![
                        ("gamma", gamma.into()),
                        ("sigma", sigma.into()),
                        ("eta", eta.into()),
                    ])
                })
                .collect()
        }
        SweepVariable::Sigma => {
            let gamma = require(cfg.f64("gamma", args.gamma)?, "gamma", "fixed success probability")?;
            grid.iter()
                .map(|&sigma| {
                    let params = risk_params(n, sigma, clip_norm, min_norm)?;
                    let eta = bounds::eta_from_gamma(&params, gamma).map_err(lib_err)?;
                    Ok(vec![
                        ("sigma", sigma.into()),
                        ("gamma", gamma.into()),
                        ("eta", eta.into()),
                    ])
                })
                .collect()
        }
        other => Err(format!(
            "emit eta supports variable gamma or sigma, not {}",
            other.column()
        )),
    }
}

fn sweep_mse(args: &SweepArgs, cfg: &ConfigMap, variable: SweepVariable, grid: &[f64]) -> CmdResult {
    if !matches!(
        variable,
        SweepVariable::Sigma | SweepVariable::M | SweepVariable::RestNorm
    ) {
        return Err(format!(
            "emit mse supports variable sigma, m or rest-norm, not {}",
            variable.column()
        ));
    }
    let seed = cfg.u64("seed", args.seed)?.unwrap_or(0);
    let target = resolve_target(args.target.clone(), args.n, args.norm, seed, cfg)?;
    let trials = cfg.usize("trials", args.trials)?.unwrap_or(500);
    let clip_norm = cfg.f64("clip-norm", args.clip_norm)?.unwrap_or(1.0);
    let rest_norm = cfg.f64("rest-norm", args.rest_norm)?;
    let m_rows = cfg.usize("m-rows", args.m_rows)?;
    let sigma = cfg.f64("sigma", args.sigma)?;
    let bias_rows = cfg.bool("bias-rows", args.bias_rows)?;
    let derivatives = cfg
        .string("loss-derivatives", args.loss_derivatives.clone())
        .map(|text| parse_f64_list(&text, "--loss-derivatives"))
        .transpose()?;

    grid.iter()
        .map(|&value| {
            let (m, s, rest) = match variable {
                SweepVariable::Sigma => (
                    m_rows.unwrap_or(1),
                    value,
                    rest_norm.unwrap_or(0.0),
                ),
                SweepVariable::M => (
                    value as usize,
                    require(sigma, "sigma", "fixed noise multiplier")?,
                    rest_norm.unwrap_or(0.0),
                ),
                SweepVariable::RestNorm => (
                    m_rows.unwrap_or(1),
                    require(sigma, "sigma", "fixed noise multiplier")?,
                    value,
                ),
                _ => unreachable!(),
            };
            let mut config = AttackConfig::new(m, clip_norm, s)
                .map_err(lib_err)?
                .with_rest_norm(rest)
                .map_err(lib_err)?
                .with_bias_rows(bias_rows)
                .with_seed(seed);
            if let Some(d) = &derivatives {
                config = config
                    .with_loss_derivatives(broadcast_derivatives(d.clone(), m))
                    .map_err(lib_err)?;
            }
            let batch = mechanism::run_trials(&target, &config, trials).map_err(lib_err)?;
            Ok(vec![
                (variable.column(), Cell::Float(value)),
                ("mse_mean", batch.mse_mean().into()),
                ("mse_q25", batch.mse_quantile(0.25).into()),
                ("mse_q50", batch.mse_quantile(0.5).into()),
                ("mse_q75", batch.mse_quantile(0.75).into()),
            ])
        })
        .collect()
}
