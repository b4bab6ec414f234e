use milstein_core::scheme::simulate_paths;
use milstein_core::{InitialDatum, SchemeConfig};
use serde::Serialize;

use super::{resolve_model, resolve_output, ModelEcho};
use crate::config::{
    pick, FileConfig, Format, SimulateArgs, DEFAULT_DT, DEFAULT_PATHS, DEFAULT_SEED, DEFAULT_STEPS,
};
use crate::error::CliError;
use crate::output::{companion, num, write_json_file, Sink};

#[derive(Serialize)]
struct Meta {
    command: &'static str,
    #[serde(flatten)]
    model: ModelEcho,
    dt: f64,
    steps: usize,
    paths: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    x0: f64,
    y0: f64,
    seed: u64,
    /// Steps whose factor was exactly zero and was replaced by the log clamp.
    clamped_steps: usize,
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    metadata: &'a Meta,
    t: Vec<f64>,
    paths: Vec<&'a [f64]>,
    mean: &'a [f64],
}

pub fn run(a: &SimulateArgs, file: &FileConfig) -> Result<(), CliError> {
    let (p, model) = resolve_model(&a.model, file)?;
    let output = resolve_output(&a.output, file, Format::Csv);
    let dt = pick(a.dt, file.dt, DEFAULT_DT);
    let steps = pick(a.steps, file.steps, DEFAULT_STEPS);
    let n_paths = pick(a.paths, file.paths, DEFAULT_PATHS);
    let theta = a.theta.or(file.theta);
    let x0 = pick(a.x0, file.x0, 1.0);
    let y0 = pick(a.y0, file.y0, 0.0);
    let seed = pick(a.seed, file.seed, DEFAULT_SEED);
    if n_paths == 0 {
        return Err(CliError::invalid("paths", "must be positive"));
    }
    let initial = InitialDatum::new(x0, y0)?;
    let cfg = match theta {
        None => SchemeConfig::milstein(dt, steps, initial, seed),
        Some(t) => SchemeConfig::theta_milstein(dt, steps, t, initial, seed),
    };
    let paths = simulate_paths(&p, &cfg, n_paths)?;

    let rows = steps + 1;
    let mean: Vec<f64> = (0..rows)
        .map(|n| paths.iter().map(|path| path.log_values()[n]).sum::<f64>() / n_paths as f64)
        .collect();
    let meta = Meta {
        command: "simulate",
        model,
        dt,
        steps,
        paths: n_paths,
        theta,
        x0,
        y0,
        seed,
        clamped_steps: paths
            .iter()
            .map(|path| path.clamped().iter().filter(|&&c| c).count())
            .sum(),
    };

    let mut sink = Sink::open(output.out.as_deref())?;
    match output.format {
        Format::Csv => {
            let mut header = Vec::with_capacity(n_paths + 2);
            header.push("t".to_string());
            header.extend((0..n_paths).map(|i| format!("path_{i}")));
            header.push("mean".to_string());
            sink.line(&header)?;
            let first = &paths[0];
            for (n, m) in mean.iter().enumerate() {
                let mut row = Vec::with_capacity(n_paths + 2);
                row.push(num(first.time(n)));
                row.extend(paths.iter().map(|path| num(path.log_values()[n])));
                row.push(num(*m));
                sink.line(&row)?;
            }
            sink.finish()?;
            if let Some(out) = &output.out {
                write_json_file(&companion(out, "meta"), &meta)?;
            }
        }
        Format::Json => {
            let record = JsonRecord {
                metadata: &meta,
                t: (0..rows).map(|n| paths[0].time(n)).collect(),
                paths: paths.iter().map(|path| path.log_values()).collect(),
                mean: &mean,
            };
            sink.json(&record)?;
            sink.finish()?;
        }
    }
    Ok(())
}
