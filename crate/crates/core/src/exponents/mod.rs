//! Discrete Lyapunov exponents of the Milstein and θ-Milstein schemes.
//!
//! Mean-square exponents are reported for `[𝔼|Z_n|²]^{1/2}` and come from the
//! closed form `𝔼|Z_n|² = |Z_0|² · baseⁿ`, so they are exact for every `n`.
//! Almost-sure exponents equal `𝔼 log|factor| / Δt` by the strong law of large
//! numbers; that expectation is evaluated by Gauss–Hermite quadrature after the
//! substitution `ΔB = √Δt · ζ`, by per-increment Monte Carlo, or from the
//! terminal slopes of simulated paths.

pub(crate) mod almost_sure;
mod mean_square;
mod sweep;
mod theta;

use serde::Serialize;

use crate::error::Result;
use crate::model::{continuum_exponent, ModelParams, Sense};

pub use almost_sure::{
    as_exponent_mc, as_exponent_path_slope, as_exponent_quadrature, DEFAULT_NODES, MC_BLOCK,
};
pub use mean_square::{
    ms_base, ms_exponent_exact, ms_remainder, ms_second_moment_exact, ms_second_moment_mc,
    MomentEstimate, RemainderReport,
};
pub use sweep::{fit_order, sweep_dt, sweep_rows, ConvergenceFit, SweepRow};
pub use theta::{theta_as_exponent_quadrature, theta_ms_exponent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MsExact,
    AsQuadrature,
    AsMonteCarlo,
    AsPathSlope,
    ThetaMsExact,
    ThetaAsQuadrature,
}

impl Method {
    pub fn sense(&self) -> Sense {
        match self {
            Method::MsExact | Method::ThetaMsExact => Sense::MeanSquare,
            _ => Sense::AlmostSure,
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Method::AsMonteCarlo | Method::AsPathSlope)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MsExact => "ms_exact",
            Method::AsQuadrature => "as_quadrature",
            Method::AsMonteCarlo => "as_monte_carlo",
            Method::AsPathSlope => "as_path_slope",
            Method::ThetaMsExact => "theta_ms_exact",
            Method::ThetaAsQuadrature => "theta_as_quadrature",
        }
    }
}

/// An exponent value (1/time) with its provenance. `std_error` and
/// `n_samples` are present exactly for the stochastic methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub value: f64,
    pub method: Method,
    pub dt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u64>,
}

impl ExponentEstimate {
    pub(crate) fn exact(value: f64, method: Method, dt: f64) -> Self {
        Self {
            value,
            method,
            dt,
            std_error: None,
            n_samples: None,
        }
    }
}

/// Estimator selection for sweeps and the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    MsExact,
    AsQuadrature {
        nodes: usize,
    },
    AsMonteCarlo {
        n_samples: u64,
        seed: u64,
    },
    /// Path-slope estimate over `n_paths` paths run to time `horizon`
    /// (`round(horizon / dt)` steps, at least one).
    AsPathSlope {
        n_paths: usize,
        horizon: f64,
        seed: u64,
    },
    ThetaMsExact {
        theta: f64,
    },
    ThetaAsQuadrature {
        theta: f64,
        nodes: usize,
    },
}

impl Estimator {
    pub fn method(&self) -> Method {
        match self {
            Estimator::MsExact => Method::MsExact,
            Estimator::AsQuadrature { .. } => Method::AsQuadrature,
            Estimator::AsMonteCarlo { .. } => Method::AsMonteCarlo,
            Estimator::AsPathSlope { .. } => Method::AsPathSlope,
            Estimator::ThetaMsExact { .. } => Method::ThetaMsExact,
            Estimator::ThetaAsQuadrature { .. } => Method::ThetaAsQuadrature,
        }
    }

    /// Continuum exponent of the sense this estimator targets.
    pub fn continuum(&self, p: &ModelParams) -> f64 {
        continuum_exponent(p, self.method().sense())
    }

    pub fn estimate(&self, p: &ModelParams, dt: f64) -> Result<ExponentEstimate> {
        match *self {
            Estimator::MsExact => ms_exponent_exact(p, dt),
            Estimator::AsQuadrature { nodes } => as_exponent_quadrature(p, dt, nodes),
            Estimator::AsMonteCarlo { n_samples, seed } => as_exponent_mc(p, dt, n_samples, seed),
            Estimator::AsPathSlope {
                n_paths,
                horizon,
                seed,
            } => almost_sure::path_slope_estimate(p, dt, n_paths, horizon, seed),
            Estimator::ThetaMsExact { theta } => theta_ms_exponent(p, theta, dt),
            Estimator::ThetaAsQuadrature { theta, nodes } => {
                theta_as_exponent_quadrature(p, theta, dt, nodes)
            }
        }
    }
}
