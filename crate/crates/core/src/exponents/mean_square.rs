use rayon::prelude::*;
use serde::Serialize;

use super::{ExponentEstimate, Method};
use crate::error::{Error, Result};
use crate::model::{continuum_ms_exponent, InitialDatum, ModelParams};
use crate::scheme::{check_dt, milstein_factor, mu};
use crate::stats::RunningStats;
use crate::stochastics::RngStream;

const SERIES_REL_TOL: f64 = 1e-16;
const SERIES_MAX_TERMS: usize = 200;

/// `base − 1 = (2λ + ε² + σ²) Δt + μ Δt²`, kept separate so `ln_1p` sees it
/// without cancellation.
fn ms_base_minus_one(p: &ModelParams, dt: f64) -> f64 {
    2.0 * continuum_ms_exponent(p) * dt + mu(p) * dt * dt
}

/// Per-step growth `1 + (2λ + ε² + σ²) Δt + μ Δt²` of `𝔼|Z_n|²`.
pub fn ms_base(p: &ModelParams, dt: f64) -> f64 {
    1.0 + ms_base_minus_one(p, dt)
}

/// Exact exponent of `[𝔼|Z_n|²]^{1/2}`: `log(base) / (2Δt)`.
pub fn ms_exponent_exact(p: &ModelParams, dt: f64) -> Result<ExponentEstimate> {
    check_dt(dt)?;
    let base = ms_base(p, dt);
    if base <= 0.0 {
        return Err(Error::NonPositiveBase { base });
    }
    let value = ms_base_minus_one(p, dt).ln_1p() / (2.0 * dt);
    Ok(ExponentEstimate::exact(value, Method::MsExact, dt))
}

/// Truncated remainder series of the squared-modulus exponent and its bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemainderReport {
    pub value: f64,
    pub bound: f64,
    pub terms_used: usize,
    pub converged: bool,
}

/// Remainder `R(Δt)` in `(1/t_n) log 𝔼|Z_n|² = 2(λ + ε²/2 + σ²/2) + R(Δt)`:
///
/// ```text
/// R = μΔt + Σ_{m≥2} ((−1)^{m−1}/m) · A^m · Δt^{m−1},   A = 2(λ + ε²/2 + σ²/2) + μΔt
/// ```
///
/// with the bound `(μ + B²/(1 − BΔt)) Δt`, `B = 2|λ + ε²/2 + σ²/2| + μΔt`.
/// Requires `q = BΔt < 1`.
pub fn ms_remainder(p: &ModelParams, dt: f64) -> Result<RemainderReport> {
    check_dt(dt)?;
    let c = continuum_ms_exponent(p);
    let mu = mu(p);
    let a = 2.0 * c + mu * dt;
    let b = 2.0 * c.abs() + mu * dt;
    let q = b * dt;
    if q >= 1.0 {
        return Err(Error::SeriesDivergent { q });
    }

    // term_m = ((−1)^{m−1}/m) · A · (AΔt)^{m−1}
    let ratio = a * dt;
    let mut power = a * ratio; // A · (AΔt)^{m−1} at m = 2
    let mut sum = mu * dt;
    let mut terms_used = 1;
    let mut converged = false;
    for m in 2..=SERIES_MAX_TERMS {
        let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
        let term = sign * power / m as f64;
        if term.abs() < SERIES_REL_TOL * sum.abs().max(1.0) {
            converged = true;
            break;
        }
        sum += term;
        terms_used = m;
        power *= ratio;
    }
    let bound = (mu + b * b / (1.0 - q)) * dt;
    Ok(RemainderReport {
        value: sum,
        bound,
        terms_used,
        converged,
    })
}

/// `𝔼|Z_n|² = |Z_0|² · baseⁿ`.
pub fn ms_second_moment_exact(
    p: &ModelParams,
    dt: f64,
    n_steps: usize,
    initial: &InitialDatum,
) -> f64 {
    initial.squared_modulus() * ms_base(p, dt).powi(n_steps as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
}

/// Monte Carlo estimate of `𝔼|Z_n|²` over `n_paths` Milstein paths; path `i`
/// draws from stream `(seed, i)`. Intended for short horizons where the raw
/// product does not overflow.
pub fn ms_second_moment_mc(
    p: &ModelParams,
    dt: f64,
    n_steps: usize,
    n_paths: u64,
    initial: &InitialDatum,
    seed: u64,
) -> Result<MomentEstimate> {
    check_dt(dt)?;
    if n_paths < 2 {
        return Err(Error::invalid("paths", "need at least two paths"));
    }
    let r2 = initial.squared_modulus();
    let samples: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::new(seed, i);
            let mut z2 = r2;
            for _ in 0..n_steps {
                let f = milstein_factor(p, dt, stream.brownian_increment(dt));
                z2 *= f * f;
            }
            z2
        })
        .collect();
    let stats: RunningStats = samples.into_iter().collect();
    Ok(MomentEstimate {
        mean: stats.mean(),
        std_error: stats.std_error(),
        n_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(l: f64, e: f64, s: f64) -> ModelParams {
        ModelParams::new(l, e, s).unwrap()
    }

    #[test]
    fn exact_exponent_examples() {
        assert_eq!(
            ms_exponent_exact(&p(0.0, 0.0, 0.0), 0.3).unwrap().value,
            0.0
        );
        let q = p(8.0, 2.0, 4.0);
        assert_relative_eq!(ms_base(&q, 1e-3), 1.036228, max_relative = 1e-15);
        // 40-digit reference: ln(1.036228) / 0.002
        let est = ms_exponent_exact(&q, 1e-3).unwrap();
        assert_relative_eq!(est.value, 17.793598421964812, max_relative = 1e-14);
        assert_eq!(est.method, Method::MsExact);
        assert!(est.std_error.is_none());
        let fine = ms_exponent_exact(&q, 1e-9).unwrap().value;
        assert!((fine - 18.0).abs() < 1e-5);
    }

    #[test]
    fn exact_exponent_rejects_non_positive_base() {
        // base = (1 − 4Δt)², exactly zero at Δt = 1/4.
        let q = p(-4.0, 0.0, 0.0);
        assert!(matches!(
            ms_exponent_exact(&q, 0.25),
            Err(Error::NonPositiveBase { base }) if base == 0.0
        ));
        assert!(ms_exponent_exact(&q, 1.0).is_err());
    }

    #[test]
    fn remainder_examples() {
        let zero = ms_remainder(&p(0.0, 0.0, 0.0), 0.01).unwrap();
        assert_eq!(zero.value, 0.0);
        assert_eq!(zero.bound, 0.0);
        assert!(zero.converged);

        let q = p(8.0, 2.0, 4.0);
        let r = ms_remainder(&q, 1e-3).unwrap();
        let exact = ms_exponent_exact(&q, 1e-3).unwrap().value;
        assert_relative_eq!(r.value, 2.0 * exact - 36.0, max_relative = 1e-12);
        assert_relative_eq!(r.value, -0.41280315607, max_relative = 1e-9);
        assert!(r.converged);
        assert!(r.value.abs() <= r.bound);

        assert!(matches!(
            ms_remainder(&q, 0.5),
            Err(Error::SeriesDivergent { q }) if (q - 75.0).abs() < 1e-12
        ));
    }

    #[test]
    fn second_moment_closed_form() {
        let q = p(8.0, 2.0, 4.0);
        let z0 = InitialDatum::new(0.6, 0.8).unwrap();
        assert_relative_eq!(
            ms_second_moment_exact(&q, 1e-3, 10, &z0),
            1.036228f64.powi(10),
            max_relative = 1e-14
        );
        let mc = ms_second_moment_mc(&q, 1e-3, 10, 20_000, &z0, 1).unwrap();
        let exact = ms_second_moment_exact(&q, 1e-3, 10, &z0);
        assert!((mc.mean - exact).abs() <= 4.0 * mc.std_error);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn contracting() -> impl Strategy<Value = (ModelParams, f64)> {
            (-20.0..20.0f64, -4.0..4.0f64, -4.0..4.0f64, 1e-6..0.2f64).prop_filter_map(
                "q >= 1",
                |(l, e, s, dt)| {
                    let q = p(l, e, s);
                    let b = 2.0 * continuum_ms_exponent(&q).abs() + mu(&q) * dt;
                    (b * dt < 0.5).then_some((q, dt))
                },
            )
        }

        proptest! {
            #[test]
            fn remainder_identity_and_bound((q, dt) in contracting()) {
                let r = ms_remainder(&q, dt).unwrap();
                let lhs = 2.0 * continuum_ms_exponent(&q) + r.value;
                let rhs = 2.0 * ms_exponent_exact(&q, dt).unwrap().value;
                let scale = lhs.abs().max(rhs.abs()).max(2.0 * continuum_ms_exponent(&q).abs() + r.value.abs());
                prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300), "lhs={lhs} rhs={rhs}");
                prop_assert!(r.value.abs() <= r.bound + 1e-12);
            }
        }
    }
}
