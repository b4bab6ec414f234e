//! SDE parameters, continuum Lyapunov exponents and stability regions.
//!
//! For the rotational system the continuum exponents are
//!
//! ```text
//! mean-square:  λ + ε²/2 + σ²/2
//! almost-sure:  λ + ε²/2 − σ²/2
//! ```
//!
//! A parameter triple is stable in a given sense when the matching exponent is
//! negative and blows up when it is positive. Triples whose exponent is within
//! [`BOUNDARY_TOL`] of zero are reported as [`Stability::Boundary`]: no claim is
//! made about the discrete scheme there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the continuum exponent below which a triple is
/// classified as lying on the region boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Drift `λ`, rotational noise `ε` and scalar noise `σ` of the SDE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    lambda: f64,
    epsilon: f64,
    sigma: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, epsilon: f64, sigma: f64) -> Result<Self> {
        for (field, v) in [("lambda", lambda), ("epsilon", epsilon), ("sigma", sigma)] {
            if !v.is_finite() {
                return Err(Error::invalid(field, format!("{v} is not finite")));
            }
        }
        Ok(Self {
            lambda,
            epsilon,
            sigma,
        })
    }

    /// Scalar linear SDE `dX = λX dt + σX dB`, i.e. `ε = 0`.
    pub fn scalar(lambda: f64, sigma: f64) -> Result<Self> {
        Self::new(lambda, 0.0, sigma)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_scalar(&self) -> bool {
        self.epsilon == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDatum {
    x0: f64,
    y0: f64,
}

impl InitialDatum {
    pub fn new(x0: f64, y0: f64) -> Result<Self> {
        if !x0.is_finite() || !y0.is_finite() {
            return Err(Error::invalid(
                "initial",
                format!("({x0}, {y0}) is not finite"),
            ));
        }
        if x0 == 0.0 && y0 == 0.0 {
            return Err(Error::invalid(
                "initial",
                "(0, 0) is the trivial equilibrium",
            ));
        }
        Ok(Self { x0, y0 })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn squared_modulus(&self) -> f64 {
        self.x0() * self.x0() + self.y0() * self.y0()
    }

    /// `log|Z_0| = ½ log(x0² + y0²)`.
    pub fn log_modulus(&self) -> f64 {
        self.x0().hypot(self.y0()).ln()
    }
}

impl Default for InitialDatum {
    fn default() -> Self {
        Self { x0: 1.0, y0: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    MeanSquare,
    AlmostSure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    BlowUp,
    Boundary,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::BlowUp => "blow_up",
            Stability::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionClass {
    pub sense: Sense,
    pub class: Stability,
}

/// `λ + ε²/2 + σ²/2`
pub fn continuum_ms_exponent(p: &ModelParams) -> f64 {
    p.lambda + p.epsilon * p.epsilon / 2.0 + p.sigma * p.sigma / 2.0
}

/// `λ + ε²/2 − σ²/2`
pub fn continuum_as_exponent(p: &ModelParams) -> f64 {
    p.lambda + p.epsilon * p.epsilon / 2.0 - p.sigma * p.sigma / 2.0
}

pub fn continuum_exponent(p: &ModelParams, sense: Sense) -> f64 {
    match sense {
        Sense::MeanSquare => continuum_ms_exponent(p),
        Sense::AlmostSure => continuum_as_exponent(p),
    }
}

pub fn classify(p: &ModelParams, sense: Sense) -> RegionClass {
    let exponent = continuum_exponent(p, sense);
    let class = if exponent < -BOUNDARY_TOL {
        Stability::Stable
    } else if exponent > BOUNDARY_TOL {
        Stability::BlowUp
    } else {
        Stability::Boundary
    };
    RegionClass { sense, class }
}

/// All `ε` on the almost-sure boundary `λ + ε²/2 − σ²/2 = 0` for fixed `λ, σ`,
/// in ascending order. Empty when `σ² < 2λ`; the single value `0` when
/// `σ² = 2λ`.
pub fn as_boundary_epsilon(lambda: f64, sigma: f64) -> Vec<f64> {
    let disc = sigma * sigma - 2.0 * lambda;
    if disc > 0.0 {
        let root = disc.sqrt();
        vec![-root, root]
    } else if disc == 0.0 {
        vec![0.0]
    } else {
        Vec::new()
    }
}
