//! Logarithmic sandwich bounds, Gaussian moments of the Milstein increment
//! and the expectation of the lower-bound correction `ξ_γ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::almost_sure::check_gamma;
use crate::model::ModelParams;
use crate::scheme::{check_dt, gamma_dt};
use crate::stats::RunningStats;
use crate::stochastics::{gauss_legendre_rule, integrate_interval, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `x > −γ`
    Upper,
    /// `x > −2γ/3`
    Lower,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogBoundDomain {
    gamma: f64,
    kind: BoundKind,
}

impl LogBoundDomain {
    pub fn new(gamma: f64, kind: BoundKind) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid("gamma", format!("{gamma} is not positive")));
        }
        Ok(Self { gamma, kind })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    /// Open left endpoint of the domain.
    pub fn left(&self) -> f64 {
        match self.kind {
            BoundKind::Upper => -self.gamma,
            BoundKind::Lower => -2.0 * self.gamma / 3.0,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.left() && x.is_finite()
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                x,
                bound: self.left(),
            })
        }
    }
}

/// `ξ_γ(x) = −x⁴/(4γ⁴)` for `x ≥ 0` and `9x³/γ³` for `−2γ/3 < x < 0`.
pub fn xi_gamma(gamma: f64, x: f64) -> Result<f64> {
    LogBoundDomain::new(gamma, BoundKind::Lower)?.check(x)?;
    Ok(xi_unchecked(gamma, x))
}

fn xi_unchecked(gamma: f64, x: f64) -> f64 {
    let u = x / gamma;
    if x >= 0.0 {
        -0.25 * u * u * u * u
    } else {
        9.0 * u * u * u
    }
}

/// `u − u²/2 + u³/3` with `u = x/γ`; the upper surrogate minus `log γ`.
fn upper_poly(gamma: f64, x: f64) -> f64 {
    let u = x / gamma;
    u - 0.5 * u * u + u * u * u / 3.0
}

/// `u − u²/2 + ξ_γ(x)`; the lower surrogate minus `log γ`.
fn lower_poly(gamma: f64, x: f64) -> f64 {
    let u = x / gamma;
    u - 0.5 * u * u + xi_unchecked(gamma, x)
}

/// `log γ + x/γ − x²/(2γ²) + x³/(3γ³)`, valid as an upper bound of
/// `log(γ + x)` for `x > −γ`.
pub fn log_upper_surrogate(gamma: f64, x: f64) -> Result<f64> {
    LogBoundDomain::new(gamma, BoundKind::Upper)?.check(x)?;
    Ok(gamma.ln() + upper_poly(gamma, x))
}

/// `log γ + x/γ − x²/(2γ²) + ξ_γ(x)`, valid as a lower bound of
/// `log(γ + x)` for `x > −2γ/3`.
pub fn log_lower_surrogate(gamma: f64, x: f64) -> Result<f64> {
    LogBoundDomain::new(gamma, BoundKind::Lower)?.check(x)?;
    Ok(gamma.ln() + lower_poly(gamma, x))
}

/// Signed margin of one bound at `x`: `upper − log(γ+x)` or
/// `log(γ+x) − lower`. Nonnegative whenever the bound holds. The common
/// `log γ` is cancelled analytically.
pub fn sandwich_margin(domain: &LogBoundDomain, x: f64) -> Result<f64> {
    domain.check(x)?;
    let g = domain.gamma;
    let log_ratio = (x / g).ln_1p();
    Ok(match domain.kind {
        BoundKind::Upper => upper_poly(g, x) - log_ratio,
        BoundKind::Lower => log_ratio - lower_poly(g, x),
    })
}

/// Grid for [`verify_log_sandwich`].
#[derive(Debug, Clone, PartialEq)]
pub enum SandwichGrid {
    /// `points` per domain: a quarter log-spaced toward the left endpoint, a
    /// quarter log-spaced on both sides of 0, the rest uniform on
    /// `(left, extent·γ]`.
    Dense { points: usize, extent: f64 },
    /// Explicit abscissae; points outside a bound's domain are skipped.
    Points(Vec<f64>),
}

impl SandwichGrid {
    pub const DEFAULT_EXTENT: f64 = 100.0;

    pub fn dense(points: usize) -> Self {
        SandwichGrid::Dense {
            points,
            extent: Self::DEFAULT_EXTENT,
        }
    }

    fn abscissae(&self, domain: &LogBoundDomain) -> Vec<f64> {
        match self {
            SandwichGrid::Points(xs) => {
                xs.iter().copied().filter(|&x| domain.contains(x)).collect()
            }
            SandwichGrid::Dense { points, extent } => {
                let g = domain.gamma;
                let left = domain.left();
                let right = extent * g;
                let quarter = points / 4;
                let eighth = points / 8;
                let uniform = points - quarter - 2 * eighth;
                let span = -left;
                let mut xs = Vec::with_capacity(*points);
                // offsets span·10^k above the left endpoint, k ∈ [−14, 0)
                xs.extend(log_offsets(quarter, -14.0, 0.0).map(|o| left + span * o));
                xs.extend(log_offsets(eighth, -12.0, 0.0).map(|o| -g * o * 0.5));
                xs.extend(log_offsets(eighth, -12.0, 0.0).map(|o| g * o));
                let h = (right - left) / uniform as f64;
                xs.extend((1..=uniform).map(|i| left + h * i as f64));
                xs.retain(|&x| domain.contains(x));
                xs
            }
        }
    }
}

fn log_offsets(n: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let step = if n > 1 {
        (hi - lo) / (n - 1) as f64
    } else {
        0.0
    };
    (0..n).map(move |i| 10f64.powf(lo + step * i as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub gamma: f64,
    pub kind: BoundKind,
    pub points: usize,
    /// Smallest margin over the grid; `None` for an empty grid.
    pub worst_margin: Option<f64>,
    pub worst_x: Option<f64>,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub tolerance: f64,
    pub checks: Vec<BoundCheck>,
}

impl SandwichReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

/// Checks `lower ≤ log(γ+x) ≤ upper` on the grid for every `γ`. A point
/// violates a bound when its margin is below `tolerance` (a nonpositive
/// number such as `−1e−12`).
pub fn verify_log_sandwich(
    gammas: &[f64],
    grid: &SandwichGrid,
    tolerance: f64,
) -> Result<SandwichReport> {
    let mut checks = Vec::with_capacity(2 * gammas.len());
    for &gamma in gammas {
        for kind in [BoundKind::Upper, BoundKind::Lower] {
            let domain = LogBoundDomain::new(gamma, kind)?;
            let xs = grid.abscissae(&domain);
            let (worst, violations) = xs
                .par_iter()
                .map(|&x| {
                    let m = sandwich_margin(&domain, x).unwrap_or(f64::NEG_INFINITY);
                    (Some((m, x)), usize::from(m < tolerance))
                })
                .reduce(|| (None, 0), |(a, na), (b, nb)| (worse(a, b), na + nb));
            checks.push(BoundCheck {
                gamma,
                kind,
                points: xs.len(),
                worst_margin: worst.map(|w| w.0),
                worst_x: worst.map(|w| w.1),
                violations,
            });
        }
    }
    Ok(SandwichReport { tolerance, checks })
}

/// Smaller margin; ties go to the smaller abscissa so the result does not
/// depend on reduction order.
fn worse(a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> Option<(f64, f64)> {
    match (a, b) {
        (None, o) | (o, None) => o,
        (Some(a), Some(b)) => {
            if (b.0, b.1) < (a.0, a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

/// `𝔼[ΔB^k]` for `ΔB ~ N(0, Δt)`: `(k−1)!! Δt^{k/2}` for even `k`, zero for odd.
pub fn gaussian_moment(order: u32, dt: f64) -> f64 {
    if order % 2 == 1 {
        return 0.0;
    }
    let half = order / 2;
    let double_factorial: f64 = (1..half).map(|j| (2 * j + 1) as f64).product();
    double_factorial * dt.powi(half as i32)
}

/// `(𝔼X, 𝔼X²)` for `X = σΔB + (σ²/2)ΔB²`: `(σ²Δt/2, σ²Δt + ¾σ⁴Δt²)`.
pub fn composite_increment_moments(sigma: f64, dt: f64) -> (f64, f64) {
    let s2 = sigma * sigma;
    (0.5 * s2 * dt, s2 * dt + 0.75 * s2 * s2 * dt * dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleMoment {
    pub mean: f64,
    pub std_error: f64,
}

impl SampleMoment {
    fn from_stats(s: &RunningStats) -> Self {
        Self {
            mean: s.mean(),
            std_error: s.std_error(),
        }
    }

    /// `|mean − exact|` in units of the standard error.
    pub fn z_score(&self, exact: f64) -> f64 {
        let diff = (self.mean - exact).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

/// Sampled `𝔼ΔB²`, `𝔼ΔB⁴` and the first two moments of
/// `σΔB + (σ²/2)ΔB²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncrementMomentsMc {
    pub n_samples: u64,
    pub db2: SampleMoment,
    pub db4: SampleMoment,
    pub composite_mean: SampleMoment,
    pub composite_second: SampleMoment,
}

const MOMENT_BLOCK: u64 = 1 << 16;

/// Monte Carlo counterpart of [`gaussian_moment`] and
/// [`composite_increment_moments`]. Block `b` of `2^16` samples draws from
/// stream `(seed, b)`; blocks are merged in order.
pub fn increment_moments_mc(
    sigma: f64,
    dt: f64,
    n_samples: u64,
    seed: u64,
) -> Result<IncrementMomentsMc> {
    check_dt(dt)?;
    if n_samples < 2 {
        return Err(Error::invalid("samples", "need at least two samples"));
    }
    let blocks: Vec<[RunningStats; 4]> = (0..n_samples.div_ceil(MOMENT_BLOCK))
        .into_par_iter()
        .map(|b| {
            let len = MOMENT_BLOCK.min(n_samples - b * MOMENT_BLOCK);
            let mut stream = RngStream::new(seed, b);
            let mut acc = [RunningStats::new(); 4];
            for _ in 0..len {
                let db = stream.brownian_increment(dt);
                let db2 = db * db;
                let x = sigma * db + 0.5 * sigma * sigma * db2;
                acc[0].push(db2);
                acc[1].push(db2 * db2);
                acc[2].push(x);
                acc[3].push(x * x);
            }
            acc
        })
        .collect();
    let mut total = [RunningStats::new(); 4];
    for block in &blocks {
        for (t, s) in total.iter_mut().zip(block) {
            t.merge(s);
        }
    }
    Ok(IncrementMomentsMc {
        n_samples,
        db2: SampleMoment::from_stats(&total[0]),
        db4: SampleMoment::from_stats(&total[1]),
        composite_mean: SampleMoment::from_stats(&total[2]),
        composite_second: SampleMoment::from_stats(&total[3]),
    })
}

/// `|σ√Δt|³/γ³ + |σ√Δt|⁴/γ⁴`, the scale that bounds `−𝔼 ξ_γ` from above.
pub fn xi_bound_scale(p: &ModelParams, dt: f64) -> f64 {
    let r = (p.sigma() * dt.sqrt()).abs() / gamma_dt(p, dt);
    r * r * r + r * r * r * r
}

const XI_TRUNCATION: f64 = 40.0;
const XI_PANELS: usize = 32;

/// `𝔼 ξ_{γ_Δt}(σΔB + (σ²/2)ΔB²)` with `ΔB = √Δt·y`. The integrand is split
/// where `a y + (a²/2) y² = 0` (`y = 0` and `y = −2/a`, `a = σ√Δt`) and each
/// piece is integrated by composite Gauss–Legendre with `nodes` points per
/// panel, on `|y| ≤ 40`. Requires `γ_Δt > 3/4`.
pub fn xi_expectation(p: &ModelParams, dt: f64, nodes: usize) -> Result<f64> {
    check_dt(dt)?;
    let gamma = check_gamma(p, dt)?;
    if nodes < 2 {
        return Err(Error::invalid("nodes", format!("{nodes} < 2")));
    }
    let a = p.sigma() * dt.sqrt();
    if a == 0.0 {
        return Ok(0.0);
    }
    let b = 0.5 * a * a;
    let rule = gauss_legendre_rule(nodes);
    let norm = (2.0 * std::f64::consts::PI).sqrt().recip();
    let integrand = |y: f64| xi_unchecked(gamma, a * y + b * y * y) * norm * (-0.5 * y * y).exp();

    let root = (-2.0 / a).clamp(-XI_TRUNCATION, XI_TRUNCATION);
    let mut cuts = [-XI_TRUNCATION, root.min(0.0), root.max(0.0), XI_TRUNCATION];
    cuts.sort_by(f64::total_cmp);
    Ok(cuts
        .windows(2)
        .map(|w| integrate_interval(&rule, w[0], w[1], XI_PANELS, integrand))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(l: f64, e: f64, s: f64) -> ModelParams {
        ModelParams::new(l, e, s).unwrap()
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi_gamma(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(xi_gamma(1.0, 1.0).unwrap(), -0.25);
        assert_eq!(xi_gamma(1.0, -0.5).unwrap(), -1.125);
        assert!(matches!(
            xi_gamma(1.0, -2.0 / 3.0),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(xi_gamma(0.0, 0.1).is_err());
        assert!(xi_gamma(-1.0, 0.1).is_err());
    }

    #[test]
    fn xi_is_continuous_at_zero() {
        for g in [1.0, 2.0, 10.0] {
            assert!(xi_gamma(g, 1e-12).unwrap().abs() < 1e-35);
            assert!(xi_gamma(g, -1e-12).unwrap().abs() < 1e-35);
        }
    }

    #[test]
    fn surrogate_examples() {
        assert_eq!(log_upper_surrogate(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(log_lower_surrogate(1.0, 0.0).unwrap(), 0.0);
        let lo = log_lower_surrogate(1.0, 0.5).unwrap();
        let hi = log_upper_surrogate(1.0, 0.5).unwrap();
        assert_relative_eq!(lo, 0.359375, max_relative = 1e-15);
        assert_relative_eq!(hi, 0.4166666666666667, max_relative = 1e-15);
        assert!(lo <= 1.5f64.ln() && 1.5f64.ln() <= hi);
        let lo2 = log_lower_surrogate(2.0, -1.0).unwrap();
        // ξ_2(−1) = 9·(−1)³/2³ = −1.125
        assert_relative_eq!(lo2, 2f64.ln() - 0.5 - 0.125 - 1.125, max_relative = 1e-15);
        assert!(lo2 <= 0.0);
        assert!(log_upper_surrogate(1.0, -1.0 - 1e-12).is_err());
        assert!(log_lower_surrogate(3.0, -2.0).is_err());
        assert!(log_upper_surrogate(3.0, -2.0).is_ok());
    }

    #[test]
    fn sandwich_on_single_point() {
        let r = verify_log_sandwich(&[1.0], &SandwichGrid::Points(vec![0.0]), -1e-12).unwrap();
        assert_eq!(r.checks.len(), 2);
        for c in &r.checks {
            assert_eq!(c.points, 1);
            assert_eq!(c.worst_margin, Some(0.0));
            assert_eq!(c.violations, 0);
        }
    }

    #[test]
    fn sandwich_dense_grid() {
        let r = verify_log_sandwich(
            &[0.75, 1.0, 2.0, 10.0],
            &SandwichGrid::dense(20_000),
            -1e-12,
        )
        .unwrap();
        assert!(r.passed(), "{r:?}");
        for c in &r.checks {
            assert!(c.points > 19_000);
        }
    }

    #[test]
    fn sandwich_reports_violations() {
        // A positive tolerance turns the tangency at 0 into a violation.
        let r = verify_log_sandwich(&[1.0], &SandwichGrid::Points(vec![0.0, 0.5]), 1e-3).unwrap();
        assert_eq!(r.checks[0].violations, 1);
        assert!(!r.passed());
    }

    #[test]
    fn gaussian_moment_ladder() {
        assert_eq!(gaussian_moment(2, 0.3), 0.3);
        assert_relative_eq!(gaussian_moment(4, 0.01), 3e-4, max_relative = 1e-15);
        assert_eq!(gaussian_moment(8, 1.0), 105.0);
        assert_eq!(gaussian_moment(3, 1.0), 0.0);
        assert_eq!(gaussian_moment(0, 0.5), 1.0);
    }

    #[test]
    fn composite_moments() {
        assert_eq!(composite_increment_moments(0.0, 0.1), (0.0, 0.0));
        let (m, s) = composite_increment_moments(2.0, 0.01);
        assert_relative_eq!(m, 0.02, max_relative = 1e-15);
        assert_relative_eq!(s, 0.0412, max_relative = 1e-15);
        for &(sigma, dt) in &[(2.0, 0.01), (-1.3, 0.2), (4.0, 1e-3)] {
            let s2: f64 = sigma * sigma;
            let mean = 0.5 * s2 * gaussian_moment(2, dt);
            let second = s2 * gaussian_moment(2, dt)
                + s2 * sigma * gaussian_moment(3, dt)
                + 0.25 * s2 * s2 * gaussian_moment(4, dt);
            let (m, s) = composite_increment_moments(sigma, dt);
            assert_relative_eq!(m, mean, max_relative = 1e-14);
            assert_relative_eq!(s, second, max_relative = 1e-14);
        }
    }

    #[test]
    fn sampled_moments_match_closed_forms() {
        let (sigma, dt) = (2.0, 0.01);
        let mc = increment_moments_mc(sigma, dt, 1_000_000, 7).unwrap();
        let (mean, second) = composite_increment_moments(sigma, dt);
        assert!(mc.db2.z_score(gaussian_moment(2, dt)) < 4.0);
        assert!(mc.db4.z_score(gaussian_moment(4, dt)) < 4.0);
        assert!(mc.composite_mean.z_score(mean) < 4.0);
        assert!(mc.composite_second.z_score(second) < 4.0);
        assert_eq!(mc, increment_moments_mc(sigma, dt, 1_000_000, 7).unwrap());
    }

    #[test]
    fn xi_expectation_matches_reference() {
        assert_eq!(xi_expectation(&p(8.0, 2.0, 0.0), 0.01, 16).unwrap(), 0.0);
        // 30-digit adaptive quadrature references.
        let cases = [
            ((8.0, 2.0, 4.0), 1e-2, -0.15861048510108447),
            ((8.0, 2.0, 4.0), 6.25e-4, -0.005399127532149935),
            ((6.0, 0.5, 4.0), 1e-3, -0.010230506939448578),
            ((1.0, 0.0, -2.0), 1e-2, -0.03374028355516519),
        ];
        for ((l, e, s), dt, expected) in cases {
            let v = xi_expectation(&p(l, e, s), dt, 16).unwrap();
            assert_relative_eq!(v, expected, max_relative = 1e-12);
            assert!(v <= 0.0);
        }
        assert!(matches!(
            xi_expectation(&p(1.0, 0.0, 4.0), 0.05, 16),
            Err(Error::GammaRestriction { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sandwich_holds(g in 0.01..100.0f64, t in 0.0..1.0f64, scale in -3.0..3.0f64) {
                let upper = LogBoundDomain::new(g, BoundKind::Upper).unwrap();
                let lower = LogBoundDomain::new(g, BoundKind::Lower).unwrap();
                let x = upper.left() + g * (1.0 - t) * 10f64.powf(scale);
                if upper.contains(x) {
                    prop_assert!(sandwich_margin(&upper, x).unwrap() >= -1e-12);
                }
                if lower.contains(x) {
                    prop_assert!(sandwich_margin(&lower, x).unwrap() >= -1e-12);
                }
            }

            #[test]
            fn xi_expectation_is_nonpositive(
                l in -5.0..5.0f64, e in -2.0..2.0f64, s in -3.0..3.0f64, dt in 1e-4..0.02f64
            ) {
                let q = p(l, e, s);
                prop_assume!(gamma_dt(&q, dt) > 0.75);
                prop_assert!(xi_expectation(&q, dt, 16).unwrap() <= 0.0);
            }
        }
    }
}
