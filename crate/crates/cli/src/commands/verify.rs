use milstein_core::exponents::{ms_second_moment_exact, ms_second_moment_mc};
use milstein_core::lemmas::{
    composite_increment_moments, gaussian_moment, increment_moments_mc, verify_log_sandwich,
    xi_bound_scale, xi_expectation, xi_gamma, SandwichGrid,
};
use milstein_core::model::continuum_ms_exponent;
use milstein_core::{ms_exponent_exact, ms_remainder, InitialDatum, ModelParams};
use serde::Serialize;
use serde_json::{json, Value};

use super::{require_json, resolve_model, resolve_output, ModelEcho};
use crate::config::{
    pick, FileConfig, Format, Suite, VerifyArgs, DEFAULT_DT, DEFAULT_SAMPLES, VERIFY_PATHS,
    VERIFY_SEED, VERIFY_STEPS,
};
use crate::error::CliError;
use crate::output::Sink;

pub const SANDWICH_GAMMAS: [f64; 4] = [0.75, 1.0, 2.0, 10.0];
pub const SANDWICH_POINTS: usize = 100_000;
pub const SANDWICH_TOL: f64 = -1e-12;
const XI_NODES: usize = 16;

#[derive(Serialize)]
struct Meta {
    command: &'static str,
    suite: Suite,
    #[serde(flatten)]
    model: ModelEcho,
    dt: f64,
    steps: usize,
    paths: usize,
    samples: u64,
    seed: u64,
}

#[derive(Serialize)]
struct Check {
    suite: Suite,
    name: &'static str,
    passed: bool,
    detail: Value,
}

#[derive(Serialize)]
struct Report<'a> {
    passed: bool,
    checks: &'a [Check],
    metadata: Meta,
}

struct Settings {
    p: ModelParams,
    dt: f64,
    steps: usize,
    paths: usize,
    samples: u64,
    seed: u64,
}

pub fn run(a: &VerifyArgs, file: &FileConfig) -> Result<bool, CliError> {
    let (p, model) = resolve_model(&a.model, file)?;
    let output = resolve_output(&a.output, file, Format::Json);
    require_json(&output, "verify")?;
    let suite = pick(a.suite, file.suite, Suite::All);
    let s = Settings {
        p,
        dt: pick(a.dt, file.dt, DEFAULT_DT),
        steps: pick(a.steps, file.steps, VERIFY_STEPS),
        paths: pick(a.paths, file.paths, VERIFY_PATHS),
        samples: pick(a.samples, file.samples, DEFAULT_SAMPLES),
        seed: pick(a.seed, file.seed, VERIFY_SEED),
    };

    let mut checks = Vec::new();
    if matches!(suite, Suite::Lemmas | Suite::All) {
        checks.extend(lemmas(&s));
    }
    if matches!(suite, Suite::Moments | Suite::All) {
        checks.extend(moments(&s));
    }
    if matches!(suite, Suite::Closedform | Suite::All) {
        checks.extend(closed_form(&s));
    }
    let passed = checks.iter().all(|c| c.passed);

    for c in &checks {
        eprintln!(
            "{:<11} {:<28} {}",
            format!("{:?}", c.suite).to_lowercase(),
            c.name,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }

    let report = Report {
        passed,
        checks: &checks,
        metadata: Meta {
            command: "verify",
            suite,
            model,
            dt: s.dt,
            steps: s.steps,
            paths: s.paths,
            samples: s.samples,
            seed: s.seed,
        },
    };
    let mut sink = Sink::open(output.out.as_deref())?;
    sink.json(&report)?;
    sink.finish()?;
    Ok(passed)
}

fn failed(suite: Suite, name: &'static str, err: impl std::fmt::Display) -> Check {
    Check {
        suite,
        name,
        passed: false,
        detail: json!({ "error": err.to_string() }),
    }
}

fn lemmas(s: &Settings) -> Vec<Check> {
    let suite = Suite::Lemmas;
    let mut out = Vec::new();

    out.push(
        match verify_log_sandwich(
            &SANDWICH_GAMMAS,
            &SandwichGrid::dense(SANDWICH_POINTS),
            SANDWICH_TOL,
        ) {
            Ok(r) => Check {
                suite,
                name: "log_sandwich",
                passed: r.passed(),
                detail: json!(r),
            },
            Err(e) => failed(suite, "log_sandwich", e),
        },
    );

    let mut worst: f64 = 0.0;
    let mut ok = true;
    for g in [1.0, 2.0, 10.0] {
        for x in [1e-12, -1e-12] {
            match xi_gamma(g, x) {
                Ok(v) => worst = worst.max(v.abs()),
                Err(_) => ok = false,
            }
        }
    }
    out.push(Check {
        suite,
        name: "xi_continuity",
        passed: ok && worst < 1e-35,
        detail: json!({ "max_abs_at_1e-12": worst }),
    });

    // The lemma bounds −𝔼ξ by C·(|σ√Δt|³/γ³ + |σ√Δt|⁴/γ⁴); report the
    // smallest C consistent with the sweep.
    let dts: Vec<f64> = std::iter::successors(Some(1e-2), |d| Some(d / 2.0))
        .take_while(|&d| d >= 1e-4)
        .collect();
    let values: Result<Vec<f64>, _> = dts
        .iter()
        .map(|&dt| xi_expectation(&s.p, dt, XI_NODES))
        .collect();
    out.push(match values {
        Ok(values) => {
            let constant = dts
                .iter()
                .zip(&values)
                .map(|(&dt, v)| {
                    let scale = xi_bound_scale(&s.p, dt);
                    if scale == 0.0 {
                        0.0
                    } else {
                        -v / scale
                    }
                })
                .fold(0.0, f64::max);
            Check {
                suite,
                name: "xi_expectation_bound",
                passed: values.iter().all(|&v| v <= 0.0) && constant.is_finite(),
                detail: json!({ "dts": dts, "values": values, "fitted_constant": constant }),
            }
        }
        Err(e) => failed(suite, "xi_expectation_bound", e),
    });
    out
}

fn moments(s: &Settings) -> Vec<Check> {
    let suite = Suite::Moments;
    let mut out = Vec::new();
    let (sigma, dt) = (s.p.sigma(), s.dt);

    let ladder = [
        (2, 0.3, 0.3),
        (4, 0.01, 3e-4),
        (8, 1.0, 105.0),
        (3, 1.0, 0.0),
        (5, 0.2, 0.0),
    ];
    let worst = ladder
        .iter()
        .map(|&(k, dt, exact)| {
            let v = gaussian_moment(k, dt);
            if exact == 0.0 {
                v.abs()
            } else {
                ((v - exact) / exact).abs()
            }
        })
        .fold(0.0, f64::max);
    out.push(Check {
        suite,
        name: "gaussian_moment_ladder",
        passed: worst <= 1e-14,
        detail: json!({ "max_rel_error": worst }),
    });

    let (mean, second) = composite_increment_moments(sigma, dt);
    let s2 = sigma * sigma;
    let mean_series = 0.5 * s2 * gaussian_moment(2, dt);
    let second_series = s2 * gaussian_moment(2, dt)
        + s2 * sigma * gaussian_moment(3, dt)
        + 0.25 * s2 * s2 * gaussian_moment(4, dt);
    let rel = |a: f64, b: f64| {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    };
    let worst = rel(mean, mean_series).max(rel(second, second_series));
    out.push(Check {
        suite,
        name: "composite_moment_expansion",
        passed: worst <= 1e-14,
        detail: json!({ "mean": mean, "second_moment": second, "max_rel_error": worst }),
    });

    out.push(match increment_moments_mc(sigma, dt, s.samples, s.seed) {
        Ok(mc) => {
            let z = [
                mc.db2.z_score(gaussian_moment(2, dt)),
                mc.db4.z_score(gaussian_moment(4, dt)),
                mc.composite_mean.z_score(mean),
                mc.composite_second.z_score(second),
            ];
            let max_z = z.iter().copied().fold(0.0, f64::max);
            Check {
                suite,
                name: "increment_moments_mc",
                passed: max_z <= 4.0,
                detail: json!({ "samples": mc, "max_z": max_z, "threshold": 4.0 }),
            }
        }
        Err(e) => failed(suite, "increment_moments_mc", e),
    });
    out
}

fn closed_form(s: &Settings) -> Vec<Check> {
    let suite = Suite::Closedform;
    let mut out = Vec::new();
    let initial = InitialDatum::default();

    let exact = ms_second_moment_exact(&s.p, s.dt, s.steps, &initial);
    out.push(
        match ms_second_moment_mc(&s.p, s.dt, s.steps, s.paths as u64, &initial, s.seed) {
            Ok(mc) => {
                let z = (mc.mean - exact).abs() / mc.std_error;
                Check {
                    suite,
                    name: "second_moment_closed_form",
                    passed: z <= 3.0,
                    detail: json!({ "exact": exact, "monte_carlo": mc, "z": z, "threshold": 3.0 }),
                }
            }
            Err(e) => failed(suite, "second_moment_closed_form", e),
        },
    );

    let identity = ms_remainder(&s.p, s.dt).and_then(|r| {
        let exact = ms_exponent_exact(&s.p, s.dt)?.value;
        Ok((r, exact))
    });
    out.push(match identity {
        Ok((r, exact)) => {
            let lhs = 2.0 * continuum_ms_exponent(&s.p) + r.value;
            let rhs = 2.0 * exact;
            let rel = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
            Check {
                suite,
                name: "remainder_identity",
                passed: rel <= 1e-10 && r.value.abs() <= r.bound,
                detail: json!({ "remainder": r, "rel_error": rel }),
            }
        }
        Err(e) => failed(suite, "remainder_identity", e),
    });
    out
}
