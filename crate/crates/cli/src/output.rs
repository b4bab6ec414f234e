//! CSV and JSON emission. Floats use Rust's shortest round-trip formatting.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub struct Sink {
    path: Option<PathBuf>,
    writer: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let writer: Box<dyn Write> = match path {
            Some(p) => {
                Box::new(BufWriter::new(File::create(p).map_err(|e| {
                    CliError::io(format!("creating {}", p.display()), e)
                })?))
            }
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self {
            path: path.map(Path::to_path_buf),
            writer,
        })
    }

    fn context(&self) -> String {
        match &self.path {
            Some(p) => format!("writing {}", p.display()),
            None => "writing stdout".to_string(),
        }
    }

    pub fn line(&mut self, fields: &[String]) -> Result<(), CliError> {
        let ctx = self.context();
        writeln!(self.writer, "{}", fields.join(",")).map_err(|e| CliError::io(ctx, e))
    }

    pub fn json<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let ctx = self.context();
        serde_json::to_writer_pretty(&mut self.writer, value)
            .map_err(|e| CliError::io(ctx.clone(), e.into()))?;
        writeln!(self.writer).map_err(|e| CliError::io(ctx, e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        let ctx = self.context();
        self.writer.flush().map_err(|e| CliError::io(ctx, e))
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// `run.csv` → `run.<suffix>.json`
pub fn companion(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(format!("{suffix}.json"))
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut sink = Sink::open(Some(path))?;
    sink.json(value)?;
    sink.finish()
}
