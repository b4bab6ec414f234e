//! Milstein and θ-Milstein discretizations of the rotational 2×2 linear SDE
//!
//! ```text
//! dZ = λ Z dt + σ Z dB₁ + ε J Z dB₂,     J = [[0, -1], [1, 0]]
//! ```
//!
//! whose modulus obeys `d log|Z| = (λ + ε²/2 - σ²/2) dt + σ dB₁`. The crate
//! simulates the Milstein recursion for `|Z_n|` in log space and computes its
//! discrete Lyapunov exponents in the mean-square and almost-sure senses:
//!
//! * [`model`]: parameters, continuum exponents and stability regions.
//! * [`scheme`]: the one-step factors and path simulation.
//! * [`exponents`]: closed-form, quadrature and Monte Carlo exponent
//!   estimators plus Δt-sweep convergence fits.
//! * [`lemmas`]: the logarithmic sandwich bounds and Gaussian moment identities
//!   used to bound the almost-sure exponent.
//! * [`stochastics`]: splittable random streams and Gauss–Hermite rules.

pub mod error;
pub mod exponents;
pub mod lemmas;
pub mod model;
pub mod scheme;
pub mod stats;
pub mod stochastics;

pub use error::{Error, Result};
pub use exponents::{
    as_exponent_mc, as_exponent_path_slope, as_exponent_quadrature, fit_order, ms_exponent_exact,
    ms_remainder, sweep_dt, sweep_rows, theta_as_exponent_quadrature, theta_ms_exponent,
    ConvergenceFit, Estimator, ExponentEstimate, Method, RemainderReport, SweepRow,
};
pub use model::{InitialDatum, ModelParams, RegionClass, Sense, Stability};
pub use scheme::{LogModulusPath, SchemeConfig};
pub use stochastics::{gauss_hermite_rule, QuadratureRule, RngStream};
