use milstein_core::{fit_order, sweep_rows, ConvergenceFit, Method};
use serde::Serialize;

use super::{resolve_estimator, resolve_model, resolve_output, EstimatorEcho, ModelEcho};
use crate::config::{FileConfig, Format, SweepArgs, DEFAULT_DTS};
use crate::error::CliError;
use crate::output::{companion, num, opt_num, write_json_file, Sink};

#[derive(Serialize)]
struct Meta {
    command: &'static str,
    #[serde(flatten)]
    model: ModelEcho,
    dts: Vec<f64>,
    #[serde(flatten)]
    estimator: EstimatorEcho,
    estimator_method: Method,
}

#[derive(Serialize)]
struct Row {
    dt: f64,
    discrete_value: Option<f64>,
    continuum_value: f64,
    abs_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
    /// `ok`, or the error kind of the failed estimate.
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    metadata: &'a Meta,
    rows: &'a [Row],
    fit: Option<&'a ConvergenceFit>,
}

pub fn run(a: &SweepArgs, file: &FileConfig) -> Result<(), CliError> {
    let (p, model) = resolve_model(&a.model, file)?;
    let output = resolve_output(&a.output, file, Format::Csv);
    let dts = a
        .dts
        .clone()
        .or_else(|| file.dts.clone())
        .unwrap_or_else(|| DEFAULT_DTS.to_vec());
    if dts.len() < 3 {
        return Err(CliError::invalid(
            "dts",
            format!("need at least 3 step sizes, got {}", dts.len()),
        ));
    }
    let (estimator, echo) = resolve_estimator(&a.estimator, file)?;

    let rows: Vec<Row> = sweep_rows(&p, &dts, &estimator)
        .into_iter()
        .map(|r| {
            let abs_error = r.abs_error();
            match r.outcome {
                Ok(est) => Row {
                    dt: r.dt,
                    discrete_value: Some(est.value),
                    continuum_value: r.continuum,
                    abs_error,
                    std_error: est.std_error,
                    status: "ok",
                    message: None,
                },
                Err(e) => Row {
                    dt: r.dt,
                    discrete_value: None,
                    continuum_value: r.continuum,
                    abs_error: None,
                    std_error: None,
                    status: e.kind(),
                    message: Some(e.to_string()),
                },
            }
        })
        .collect();
    let (ok_dts, ok_errors): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.abs_error.map(|e| (r.dt, e)))
        .unzip();
    let fit = fit_order(&ok_dts, &ok_errors);
    let meta = Meta {
        command: "sweep-dt",
        model,
        dts,
        estimator: echo,
        estimator_method: estimator.method(),
    };

    let mut sink = Sink::open(output.out.as_deref())?;
    match output.format {
        Format::Csv => {
            let header = [
                "dt",
                "discrete_value",
                "continuum_value",
                "abs_error",
                "status",
            ];
            sink.line(&header.map(String::from))?;
            for r in &rows {
                sink.line(&[
                    num(r.dt),
                    opt_num(r.discrete_value),
                    num(r.continuum_value),
                    opt_num(r.abs_error),
                    r.status.to_string(),
                ])?;
            }
            sink.finish()?;
            match (&output.out, &fit) {
                (Some(out), _) => {
                    write_json_file(&companion(out, "meta"), &meta)?;
                    if let Ok(fit) = &fit {
                        write_json_file(&companion(out, "fit"), fit)?;
                    }
                }
                (None, Ok(fit)) => {
                    eprintln!(
                        "{}",
                        serde_json::to_string_pretty(fit).expect("fit serializes")
                    );
                }
                (None, Err(_)) => {}
            }
        }
        Format::Json => {
            let record = JsonRecord {
                metadata: &meta,
                rows: &rows,
                fit: fit.as_ref().ok(),
            };
            sink.json(&record)?;
            sink.finish()?;
        }
    }
    fit.map(|_| ()).map_err(CliError::from)
}
