//! Random streams and quadrature rules shared by the estimators.

mod quadrature;
mod rng;

pub use quadrature::{
    gauss_hermite_rule, gauss_legendre_rule, integrate_interval, QuadratureRule, MAX_NODES,
    MIN_NODES,
};
pub use rng::{standard_normal, RngStream};
