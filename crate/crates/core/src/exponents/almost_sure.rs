use rayon::prelude::*;

use super::{ExponentEstimate, Method};
use crate::error::{Error, Result};
use crate::model::{InitialDatum, ModelParams};
use crate::scheme::{
    check_dt, gamma_dt, milstein_factor, simulate_paths, LogModulusPath, SchemeConfig,
};
use crate::stats::RunningStats;
use crate::stochastics::{gauss_hermite_rule, RngStream, MAX_NODES, MIN_NODES};

pub const DEFAULT_NODES: usize = 201;

/// Samples per Monte Carlo block; block `b` draws from stream `(seed, b)`.
pub const MC_BLOCK: u64 = 1 << 16;

const MIN_MC_SAMPLES: u64 = 100;
const NODE_DOUBLING_TOL: f64 = 1e-10;

/// Lower limit on `γ_Δt` keeping `γ_Δt + σΔB + (σ²/2)ΔB² ≥ γ_Δt − 1/2 > 1/4`.
const GAMMA_FLOOR: f64 = 0.75;

pub(crate) fn check_gamma(p: &ModelParams, dt: f64) -> Result<f64> {
    let gamma = gamma_dt(p, dt);
    if gamma > GAMMA_FLOOR {
        Ok(gamma)
    } else {
        Err(Error::GammaRestriction { gamma })
    }
}

/// `(1/Δt) · 𝔼 log(offset + scale · (σ√Δt y + (σ²Δt/2) y²))`, `y ~ N(0, 1)`,
/// evaluated as `log(offset) + 𝔼 log1p(·/offset)` with an `nodes`-point
/// Gauss–Hermite rule and checked against a rule with twice (or, at the size
/// cap, half) as many nodes.
pub(crate) fn log_factor_expectation(
    offset: f64,
    scale: f64,
    sigma: f64,
    dt: f64,
    nodes: usize,
) -> Result<f64> {
    let evaluate = |n: usize| -> Result<f64> {
        let rule = gauss_hermite_rule(n)?;
        let a = sigma * dt.sqrt();
        let b = 0.5 * a * a;
        let mean_log1p = rule.integrate(|y| ((a * y + b * y * y) * scale / offset).ln_1p());
        Ok((offset.ln() + mean_log1p) / dt)
    };
    let value = evaluate(nodes)?;
    let reference_nodes = if 2 * nodes <= MAX_NODES {
        2 * nodes
    } else {
        (nodes / 2).max(MIN_NODES)
    };
    let reference = evaluate(reference_nodes)?;
    let difference = (value - reference).abs();
    if difference > NODE_DOUBLING_TOL * value.abs().max(1.0) {
        return Err(Error::QuadratureNotConverged {
            nodes,
            reference_nodes,
            difference,
        });
    }
    Ok(value)
}

/// Almost-sure exponent `(1/Δt) 𝔼 log|γ_Δt + σΔB + (σ²/2)ΔB²|` by
/// Gauss–Hermite quadrature. Requires `γ_Δt > 3/4`.
pub fn as_exponent_quadrature(p: &ModelParams, dt: f64, nodes: usize) -> Result<ExponentEstimate> {
    check_dt(dt)?;
    let gamma = check_gamma(p, dt)?;
    let value = log_factor_expectation(gamma, 1.0, p.sigma(), dt, nodes)?;
    Ok(ExponentEstimate::exact(value, Method::AsQuadrature, dt))
}

/// Almost-sure exponent from `n_samples` i.i.d. increments: the strong-law
/// average of `log|factor|` divided by `Δt`, with its standard error.
pub fn as_exponent_mc(
    p: &ModelParams,
    dt: f64,
    n_samples: u64,
    seed: u64,
) -> Result<ExponentEstimate> {
    check_dt(dt)?;
    check_gamma(p, dt)?;
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::invalid(
            "samples",
            format!("{n_samples} < {MIN_MC_SAMPLES}"),
        ));
    }
    let n_blocks = n_samples.div_ceil(MC_BLOCK);
    let blocks: Vec<RunningStats> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let len = MC_BLOCK.min(n_samples - b * MC_BLOCK);
            let mut stream = RngStream::new(seed, b);
            let mut stats = RunningStats::new();
            for _ in 0..len {
                let f = milstein_factor(p, dt, stream.brownian_increment(dt));
                stats.push(f.abs().ln());
            }
            stats
        })
        .collect();
    let mut total = RunningStats::new();
    for block in &blocks {
        total.merge(block);
    }
    Ok(ExponentEstimate {
        value: total.mean() / dt,
        method: Method::AsMonteCarlo,
        dt,
        std_error: Some(total.std_error() / dt),
        n_samples: Some(n_samples),
    })
}

/// Mean terminal slope `(log|Z_n| − log|Z_0|)/t_n` across paths, with the
/// cross-path standard error.
pub fn as_exponent_path_slope(paths: &[LogModulusPath]) -> Result<ExponentEstimate> {
    let first = match paths {
        [first, _, ..] => first,
        _ => return Err(Error::GridMismatch("need at least two paths".into())),
    };
    if first.n_steps() == 0 {
        return Err(Error::GridMismatch("paths have no steps".into()));
    }
    for (i, path) in paths.iter().enumerate().skip(1) {
        if path.dt() != first.dt() || path.n_steps() != first.n_steps() {
            return Err(Error::GridMismatch(format!(
                "path {i} has dt = {}, n = {}; path 0 has dt = {}, n = {}",
                path.dt(),
                path.n_steps(),
                first.dt(),
                first.n_steps()
            )));
        }
    }
    let stats: RunningStats = paths.iter().map(LogModulusPath::terminal_slope).collect();
    Ok(ExponentEstimate {
        value: stats.mean(),
        method: Method::AsPathSlope,
        dt: first.dt(),
        std_error: Some(stats.std_error()),
        n_samples: Some(paths.len() as u64),
    })
}

pub(crate) fn path_slope_estimate(
    p: &ModelParams,
    dt: f64,
    n_paths: usize,
    horizon: f64,
    seed: u64,
) -> Result<ExponentEstimate> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid(
            "horizon",
            format!("{horizon} is not positive"),
        ));
    }
    let n_steps = ((horizon / dt).round() as usize).max(1);
    let cfg = SchemeConfig::milstein(dt, n_steps, InitialDatum::default(), seed);
    let paths = simulate_paths(p, &cfg, n_paths)?;
    as_exponent_path_slope(&paths)
}
