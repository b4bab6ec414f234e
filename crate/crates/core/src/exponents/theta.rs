use super::almost_sure::log_factor_expectation;
use super::{ExponentEstimate, Method};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scheme::{check_dt, check_theta, theta_denominator, theta_eta};

fn check_scalar(p: &ModelParams) -> Result<()> {
    if p.is_scalar() {
        Ok(())
    } else {
        Err(Error::invalid(
            "epsilon",
            format!("θ-scheme is scalar, got ε = {}", p.epsilon()),
        ))
    }
}

/// Exponent of `[𝔼|X_n^θ|²]^{1/2}`:
///
/// ```text
/// (1/2Δt) · log(η² + σ²ηΔt/d + (σ²Δt + ¾σ⁴Δt²)/d²),   d = 1 − λθΔt
/// ```
///
/// The logarithm is taken as `log1p(arg − 1)` with `η − 1 = (λ − σ²/2)Δt/d`.
pub fn theta_ms_exponent(p: &ModelParams, theta: f64, dt: f64) -> Result<ExponentEstimate> {
    check_scalar(p)?;
    check_dt(dt)?;
    check_theta(theta)?;
    let eta = theta_eta(p, theta, dt)?;
    let d = theta_denominator(p, theta, dt);
    let (l, s) = (p.lambda(), p.sigma());
    let s2 = s * s;
    let eta_minus_one = (l - s2 / 2.0) * dt / d;
    let arg_minus_one = eta_minus_one * (eta + 1.0)
        + s2 * eta * dt / d
        + (s2 * dt + 0.75 * s2 * s2 * dt * dt) / (d * d);
    let argument = 1.0 + arg_minus_one;
    if argument <= 0.0 {
        return Err(Error::NonPositiveLogArgument { argument });
    }
    let value = arg_minus_one.ln_1p() / (2.0 * dt);
    Ok(ExponentEstimate::exact(value, Method::ThetaMsExact, dt))
}

/// Almost-sure exponent `(1/Δt) 𝔼 log|η_Δt + (σΔB + (σ²/2)ΔB²)/d|` by
/// Gauss–Hermite quadrature. Requires `η_Δt − 1/(2d) > 0`.
pub fn theta_as_exponent_quadrature(
    p: &ModelParams,
    theta: f64,
    dt: f64,
    nodes: usize,
) -> Result<ExponentEstimate> {
    check_scalar(p)?;
    check_dt(dt)?;
    check_theta(theta)?;
    let eta = theta_eta(p, theta, dt)?;
    let d = theta_denominator(p, theta, dt);
    let margin = eta - 0.5 / d;
    if margin <= 0.0 {
        return Err(Error::ThetaRestriction { margin });
    }
    let value = log_factor_expectation(eta, 1.0 / d, p.sigma(), dt, nodes)?;
    Ok(ExponentEstimate::exact(
        value,
        Method::ThetaAsQuadrature,
        dt,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{as_exponent_quadrature, ms_exponent_exact, DEFAULT_NODES};
    use approx::assert_relative_eq;

    fn p(l: f64, s: f64) -> ModelParams {
        ModelParams::scalar(l, s).unwrap()
    }

    #[test]
    fn explicit_limit_matches_milstein() {
        for &(l, s, dt) in &[
            (6.0, 4.0, 1e-3),
            (-3.0, 1.5, 0.05),
            (8.0, 4.0, 1e-5),
            (0.0, 0.0, 0.1),
        ] {
            let q = p(l, s);
            let ms = ms_exponent_exact(&q, dt).unwrap().value;
            let th = theta_ms_exponent(&q, 0.0, dt).unwrap().value;
            assert!(
                (ms - th).abs() <= 1e-12 * ms.abs().max(1e-300),
                "{l} {s} {dt}: {ms} {th}"
            );
            let a = as_exponent_quadrature(&q, dt, DEFAULT_NODES).unwrap().value;
            let b = theta_as_exponent_quadrature(&q, 0.0, dt, DEFAULT_NODES)
                .unwrap()
                .value;
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn deterministic_implicit_euler() {
        let q = p(1.0, 0.0);
        let ms = theta_ms_exponent(&q, 1.0, 0.1).unwrap();
        assert_relative_eq!(ms.value, 10.0 * (1.0f64 / 0.9).ln(), max_relative = 1e-14);
        assert_relative_eq!(ms.value, 1.053605156578263, max_relative = 1e-13);
        assert_eq!(ms.method, Method::ThetaMsExact);
        let eta = theta_eta(&q, 1.0, 0.1).unwrap();
        let a = theta_as_exponent_quadrature(&q, 1.0, 0.1, DEFAULT_NODES).unwrap();
        assert_relative_eq!(a.value, eta.ln() / 0.1, max_relative = 1e-14);
    }

    #[test]
    fn small_step_limits() {
        let q = p(6.0, 4.0);
        let ms = theta_ms_exponent(&q, 0.5, 1e-7).unwrap().value;
        assert!((ms - 14.0).abs() < 1e-4, "{ms}");
        let a = theta_as_exponent_quadrature(&q, 1.0, 1e-3, DEFAULT_NODES)
            .unwrap()
            .value;
        assert!((a + 2.0).abs() < 4.0 * 1e-3f64.sqrt(), "{a}");
    }

    #[test]
    fn preconditions() {
        let eps = ModelParams::new(1.0, 0.5, 1.0).unwrap();
        assert!(matches!(
            theta_ms_exponent(&eps, 0.5, 0.01),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            theta_ms_exponent(&p(20.0, 0.0), 0.5, 0.1),
            Err(Error::ImplicitPole { .. })
        ));
        assert!(theta_ms_exponent(&p(1.0, 1.0), 1.5, 0.1).is_err());
        // η = 1 + (1 − 2)·0.6 = 0.4 < 1/2
        assert!(matches!(
            theta_as_exponent_quadrature(&p(1.0, 2.0), 0.0, 0.6, DEFAULT_NODES),
            Err(Error::ThetaRestriction { .. })
        ));
    }
}
