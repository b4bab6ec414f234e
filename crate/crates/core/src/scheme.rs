//! Milstein and θ-Milstein recursions for the solution modulus.
//!
//! The Milstein scheme advances the modulus by a multiplicative factor
//!
//! ```text
//! |Z_n| = |Z_{n-1}| · (γ_Δt + σ ΔB + (σ²/2) ΔB²),   γ_Δt = 1 + (λ + ε²/2 − σ²/2) Δt
//! ```
//!
//! and the drift-implicit θ variant of the scalar equation (`ε = 0`) by
//!
//! ```text
//! X_n = X_{n-1} · (η_Δt + (σ ΔB + (σ²/2) ΔB²) / (1 − λθΔt)),
//! η_Δt = (1 + (λ(1 − θ) − σ²/2) Δt) / (1 − λθΔt).
//! ```
//!
//! Paths are accumulated as sums of `log|factor|`; `|Z_n|` itself is never
//! formed, so blow-up parameters cannot overflow over long horizons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InitialDatum, ModelParams};
use crate::stochastics::RngStream;

/// Log contribution substituted for a factor that is exactly zero in floating
/// point; close to `ln(f64::MIN_POSITIVE · f64::EPSILON)`.
pub const LOG_CLAMP: f64 = -745.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub dt: f64,
    pub n_steps: usize,
    /// Drift implicitness; `None` selects the plain Milstein scheme.
    pub theta: Option<f64>,
    pub initial: InitialDatum,
    pub seed: u64,
}

impl SchemeConfig {
    pub fn milstein(dt: f64, n_steps: usize, initial: InitialDatum, seed: u64) -> Self {
        Self {
            dt,
            n_steps,
            theta: None,
            initial,
            seed,
        }
    }

    pub fn theta_milstein(
        dt: f64,
        n_steps: usize,
        theta: f64,
        initial: InitialDatum,
        seed: u64,
    ) -> Self {
        Self {
            dt,
            n_steps,
            theta: Some(theta),
            initial,
            seed,
        }
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        check_dt(self.dt)?;
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be positive"));
        }
        if let Some(theta) = self.theta {
            check_theta(theta)?;
            let denominator = theta_denominator(p, theta, self.dt);
            if denominator <= 0.0 {
                return Err(Error::ImplicitPole { denominator });
            }
        }
        Ok(())
    }
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 && dt < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("dt", format!("{dt} is not in (0, 1)")))
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::invalid("theta", format!("{theta} is not in [0, 1]")))
    }
}

/// A discretized trajectory of `log|Z_n|`, `n = 0..=n_steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogModulusPath {
    dt: f64,
    log_values: Vec<f64>,
    clamped: Vec<bool>,
}

impl LogModulusPath {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.log_values.len() - 1
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    /// `clamped()[k]` is set when the factor of step `k → k + 1` was zero.
    pub fn clamped(&self) -> &[bool] {
        &self.clamped
    }

    pub fn any_clamped(&self) -> bool {
        self.clamped.iter().any(|&c| c)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// `(log|Z_n| − log|Z_0|) / t_n` at the final step.
    pub fn terminal_slope(&self) -> f64 {
        let n = self.n_steps();
        (self.log_values[n] - self.log_values[0]) / self.time(n)
    }
}

/// `γ_Δt = 1 + (λ + ε²/2 − σ²/2) Δt`
pub fn gamma_dt(p: &ModelParams, dt: f64) -> f64 {
    let (l, e, s) = (p.lambda(), p.epsilon(), p.sigma());
    1.0 + (l + e * e / 2.0 - s * s / 2.0) * dt
}

/// `μ = λ² + λε² + ε⁴/4 + σ⁴/2 = (λ + ε²/2)² + σ⁴/2`
pub fn mu(p: &ModelParams) -> f64 {
    let (l, e, s) = (p.lambda(), p.epsilon(), p.sigma());
    let e2 = e * e;
    let s2 = s * s;
    l * l + l * e2 + e2 * e2 / 4.0 + s2 * s2 / 2.0
}

/// The random part `σ ΔB + (σ²/2) ΔB² = ((σΔB + 1)² − 1)/2 ≥ −1/2` of the factor.
pub fn noise_term(sigma: f64, db: f64) -> f64 {
    sigma * db + 0.5 * sigma * sigma * db * db
}

/// One-step Milstein factor `γ_Δt + σ ΔB + (σ²/2) ΔB²`.
pub fn milstein_factor(p: &ModelParams, dt: f64, db: f64) -> f64 {
    gamma_dt(p, dt) + noise_term(p.sigma(), db)
}

/// `1 − λθΔt`
pub fn theta_denominator(p: &ModelParams, theta: f64, dt: f64) -> f64 {
    1.0 - p.lambda() * theta * dt
}

/// `η_Δt = (1 + (λ(1 − θ) − σ²/2) Δt) / (1 − λθΔt)`
pub fn theta_eta(p: &ModelParams, theta: f64, dt: f64) -> Result<f64> {
    let denominator = theta_denominator(p, theta, dt);
    if denominator <= 0.0 {
        return Err(Error::ImplicitPole { denominator });
    }
    let (l, s) = (p.lambda(), p.sigma());
    Ok((1.0 + (l * (1.0 - theta) - s * s / 2.0) * dt) / denominator)
}

/// One-step θ-Milstein factor `η_Δt + (σ ΔB + (σ²/2) ΔB²)/(1 − λθΔt)`.
pub fn theta_factor(p: &ModelParams, theta: f64, dt: f64, db: f64) -> Result<f64> {
    let eta = theta_eta(p, theta, dt)?;
    Ok(eta + noise_term(p.sigma(), db) / theta_denominator(p, theta, dt))
}

fn accumulate<F: FnMut() -> f64>(
    dt: f64,
    log0: f64,
    n_steps: usize,
    mut next_factor: F,
) -> LogModulusPath {
    let mut log_values = Vec::with_capacity(n_steps + 1);
    let mut clamped = Vec::with_capacity(n_steps);
    let mut acc = log0;
    log_values.push(acc);
    for _ in 0..n_steps {
        let factor = next_factor().abs();
        if factor == 0.0 {
            acc += LOG_CLAMP;
            clamped.push(true);
        } else {
            acc += factor.ln();
            clamped.push(false);
        }
        log_values.push(acc);
    }
    LogModulusPath {
        dt,
        log_values,
        clamped,
    }
}

/// Simulates `log|Z_n|` under the Milstein scheme, drawing `ΔB_k ~ N(0, dt)`
/// from `stream`.
pub fn simulate_path(
    p: &ModelParams,
    cfg: &SchemeConfig,
    stream: &mut RngStream,
) -> Result<LogModulusPath> {
    cfg.validate(p)?;
    if cfg.theta.is_some() {
        return Err(Error::invalid(
            "theta",
            "plain Milstein paths take no theta; use simulate_theta_path",
        ));
    }
    let dt = cfg.dt;
    let gamma = gamma_dt(p, dt);
    let sigma = p.sigma();
    Ok(accumulate(
        dt,
        cfg.initial.log_modulus(),
        cfg.n_steps,
        || gamma + noise_term(sigma, stream.brownian_increment(dt)),
    ))
}

/// Simulates the scalar θ-Milstein scheme; requires `ε = 0`.
pub fn simulate_theta_path(
    p: &ModelParams,
    cfg: &SchemeConfig,
    stream: &mut RngStream,
) -> Result<LogModulusPath> {
    cfg.validate(p)?;
    let theta = cfg
        .theta
        .ok_or_else(|| Error::invalid("theta", "theta-Milstein paths need theta"))?;
    if !p.is_scalar() {
        return Err(Error::invalid(
            "epsilon",
            "the theta-Milstein scheme is defined for the scalar equation (epsilon = 0)",
        ));
    }
    let dt = cfg.dt;
    let eta = theta_eta(p, theta, dt)?;
    let denominator = theta_denominator(p, theta, dt);
    let sigma = p.sigma();
    Ok(accumulate(
        dt,
        cfg.initial.log_modulus(),
        cfg.n_steps,
        || eta + noise_term(sigma, stream.brownian_increment(dt)) / denominator,
    ))
}

/// Simulates `n_paths` independent paths; path `i` uses stream `(cfg.seed, i)`.
/// Dispatches on `cfg.theta`. Output order and values do not depend on the
/// rayon pool size.
pub fn simulate_paths(
    p: &ModelParams,
    cfg: &SchemeConfig,
    n_paths: usize,
) -> Result<Vec<LogModulusPath>> {
    cfg.validate(p)?;
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::new(cfg.seed, i);
            match cfg.theta {
                None => simulate_path(p, cfg, &mut stream),
                Some(_) => simulate_theta_path(p, cfg, &mut stream),
            }
        })
        .collect()
}
