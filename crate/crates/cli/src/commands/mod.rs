mod exponent;
mod region;
mod simulate;
mod sweep;
mod verify;

use milstein_core::exponents::DEFAULT_NODES;
use milstein_core::{Estimator, ModelParams};
use serde::Serialize;

use crate::config::{
    pick, Command, EstimatorArgs, FileConfig, Format, MethodArg, ModelArgs, OutputArgs,
    DEFAULT_EPSILON, DEFAULT_HORIZON, DEFAULT_LAMBDA, DEFAULT_PATHS, DEFAULT_SAMPLES, DEFAULT_SEED,
    DEFAULT_SIGMA,
};
use crate::error::CliError;

/// Runs one subcommand. `Ok(false)` means a verification check failed.
pub fn run(command: &Command, file: &FileConfig) -> Result<bool, CliError> {
    match command {
        Command::Simulate(a) => simulate::run(a, file).map(|_| true),
        Command::Exponent(a) => exponent::run(a, file).map(|_| true),
        Command::SweepDt(a) => sweep::run(a, file).map(|_| true),
        Command::Region(a) => region::run(a, file).map(|_| true),
        Command::Verify(a) => verify::run(a, file),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ModelEcho {
    lambda: f64,
    epsilon: f64,
    sigma: f64,
}

fn resolve_model(m: &ModelArgs, file: &FileConfig) -> Result<(ModelParams, ModelEcho), CliError> {
    let echo = ModelEcho {
        lambda: pick(m.lambda, file.lambda, DEFAULT_LAMBDA),
        epsilon: pick(m.epsilon, file.epsilon, DEFAULT_EPSILON),
        sigma: pick(m.sigma, file.sigma, DEFAULT_SIGMA),
    };
    let p = ModelParams::new(echo.lambda, echo.epsilon, echo.sigma)?;
    Ok((p, echo))
}

struct Output {
    out: Option<std::path::PathBuf>,
    format: Format,
}

fn resolve_output(o: &OutputArgs, file: &FileConfig, default: Format) -> Output {
    Output {
        out: o.out.clone().or_else(|| file.out.clone()),
        format: pick(o.format, file.format, default),
    }
}

/// Exponent and verify records are JSON only.
fn require_json(o: &Output, command: &str) -> Result<(), CliError> {
    if o.format == Format::Csv {
        return Err(CliError::invalid(
            "format",
            format!("{command} writes JSON only"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
struct EstimatorEcho {
    method: MethodArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paths: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn resolve_estimator(
    e: &EstimatorArgs,
    file: &FileConfig,
) -> Result<(Estimator, EstimatorEcho), CliError> {
    let method = pick(e.method, file.method, MethodArg::AsQuadrature);
    let theta = e.theta.or(file.theta);
    let nodes = pick(e.nodes, file.nodes, DEFAULT_NODES);
    let seed = pick(e.seed, file.seed, DEFAULT_SEED);
    let mut echo = EstimatorEcho {
        method,
        theta,
        nodes: None,
        samples: None,
        paths: None,
        horizon: None,
        seed: None,
    };
    let estimator = match (method, theta) {
        (MethodArg::MsExact, None) => Estimator::MsExact,
        (MethodArg::MsExact, Some(theta)) => Estimator::ThetaMsExact { theta },
        (MethodArg::AsQuadrature, theta) => {
            echo.nodes = Some(nodes);
            match theta {
                None => Estimator::AsQuadrature { nodes },
                Some(theta) => Estimator::ThetaAsQuadrature { theta, nodes },
            }
        }
        (MethodArg::AsMc, None) => {
            let n_samples = pick(e.samples, file.samples, DEFAULT_SAMPLES);
            echo.samples = Some(n_samples);
            echo.seed = Some(seed);
            Estimator::AsMonteCarlo { n_samples, seed }
        }
        (MethodArg::AsPathSlope, None) => {
            let n_paths = pick(e.paths, file.paths, DEFAULT_PATHS);
            let horizon = pick(e.horizon, file.horizon, DEFAULT_HORIZON);
            echo.paths = Some(n_paths);
            echo.horizon = Some(horizon);
            echo.seed = Some(seed);
            Estimator::AsPathSlope {
                n_paths,
                horizon,
                seed,
            }
        }
        (_, Some(_)) => {
            return Err(CliError::invalid(
                "theta",
                "only ms-exact and as-quadrature have a θ-scheme variant",
            ))
        }
    };
    Ok((estimator, echo))
}
