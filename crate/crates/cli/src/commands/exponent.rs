use milstein_core::model::classify;
use milstein_core::{Method, Sense, Stability};
use serde::Serialize;

use super::{
    require_json, resolve_estimator, resolve_model, resolve_output, EstimatorEcho, ModelEcho,
};
use crate::config::{pick, ExponentArgs, FileConfig, Format, DEFAULT_DT};
use crate::error::CliError;
use crate::output::Sink;

#[derive(Serialize)]
struct Meta {
    command: &'static str,
    #[serde(flatten)]
    model: ModelEcho,
    dt: f64,
    #[serde(flatten)]
    estimator: EstimatorEcho,
}

#[derive(Serialize)]
struct Record {
    method: Method,
    dt: f64,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_samples: Option<u64>,
    continuum_value: f64,
    sense: Sense,
    region_class: Stability,
    metadata: Meta,
}

pub fn run(a: &ExponentArgs, file: &FileConfig) -> Result<(), CliError> {
    let (p, model) = resolve_model(&a.model, file)?;
    let output = resolve_output(&a.output, file, Format::Json);
    require_json(&output, "exponent")?;
    let dt = pick(a.dt, file.dt, DEFAULT_DT);
    let (estimator, echo) = resolve_estimator(&a.estimator, file)?;
    let est = estimator.estimate(&p, dt)?;
    let class = classify(&p, est.method.sense());
    let record = Record {
        method: est.method,
        dt: est.dt,
        value: est.value,
        std_error: est.std_error,
        n_samples: est.n_samples,
        continuum_value: estimator.continuum(&p),
        sense: class.sense,
        region_class: class.class,
        metadata: Meta {
            command: "exponent",
            model,
            dt,
            estimator: echo,
        },
    };
    let mut sink = Sink::open(output.out.as_deref())?;
    sink.json(&record)?;
    sink.finish()
}
