use milstein_core::model::{as_boundary_epsilon, classify};
use milstein_core::{ModelParams, Sense, Stability};
use serde::Serialize;

use super::resolve_output;
use crate::config::{
    parse_sigma_range, pick, FileConfig, Format, RegionArgs, DEFAULT_LAMBDA, DEFAULT_SIGMA_RANGE,
};
use crate::error::CliError;
use crate::output::{companion, num, opt_num, write_json_file, Sink};

#[derive(Serialize)]
struct Meta {
    command: &'static str,
    lambda: f64,
    sigma_range: String,
    sense: Sense,
}

#[derive(Serialize)]
struct Row {
    sigma: f64,
    epsilon_boundary_plus: Option<f64>,
    epsilon_boundary_minus: Option<f64>,
    class_at_epsilon_0: Stability,
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    metadata: &'a Meta,
    rows: &'a [Row],
}

pub fn run(a: &RegionArgs, file: &FileConfig) -> Result<(), CliError> {
    let output = resolve_output(&a.output, file, Format::Csv);
    let lambda = pick(a.lambda, file.lambda, DEFAULT_LAMBDA);
    let range = a
        .sigma_range
        .clone()
        .or_else(|| file.sigma_range.clone())
        .unwrap_or_else(|| DEFAULT_SIGMA_RANGE.to_string());
    let sigmas = parse_sigma_range(&range)?;
    let rows = sigmas
        .iter()
        .map(|&sigma| {
            let roots = as_boundary_epsilon(lambda, sigma);
            let p = ModelParams::new(lambda, 0.0, sigma)?;
            Ok(Row {
                sigma,
                epsilon_boundary_plus: roots.last().copied(),
                epsilon_boundary_minus: roots.first().copied(),
                class_at_epsilon_0: classify(&p, Sense::AlmostSure).class,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let meta = Meta {
        command: "region",
        lambda,
        sigma_range: range,
        sense: Sense::AlmostSure,
    };

    let mut sink = Sink::open(output.out.as_deref())?;
    match output.format {
        Format::Csv => {
            let header = [
                "sigma",
                "epsilon_boundary_plus",
                "epsilon_boundary_minus",
                "class_at_epsilon_0",
            ];
            sink.line(&header.map(String::from))?;
            for r in &rows {
                sink.line(&[
                    num(r.sigma),
                    opt_num(r.epsilon_boundary_plus),
                    opt_num(r.epsilon_boundary_minus),
                    r.class_at_epsilon_0.as_str().to_string(),
                ])?;
            }
            sink.finish()?;
            if let Some(out) = &output.out {
                write_json_file(&companion(out, "meta"), &meta)?;
            }
        }
        Format::Json => {
            sink.json(&JsonRecord {
                metadata: &meta,
                rows: &rows,
            })?;
            sink.finish()?;
        }
    }
    Ok(())
}
