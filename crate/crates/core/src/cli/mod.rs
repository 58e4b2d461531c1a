//! Experiment runner behind the `holevo` binary.

pub mod config;
pub mod fit;
pub mod output;
pub mod run;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::{parse_angle, ConfigError, ExperimentConfig, Format, Mode};
pub use run::{run, RunError, RunOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
/// Numerical or I/O failure outside validate mode.
pub const EXIT_RUNTIME: i32 = 1;

/// Loads the optional config file, then applies `key=value` overrides in
/// order.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig, RunError> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| RunError::Io {
                path: p.display().to_string(),
                message: e.to_string(),
            })?;
            ExperimentConfig::from_json_str(&text)?
        }
        None => ExperimentConfig::default(),
    };
    for o in overrides {
        config.apply_override(o)?;
    }
    Ok(config)
}

/// Metadata line for the CSV header comment; fully determined by the config.
pub fn header_comment(config: &ExperimentConfig) -> String {
    format!(
        "holevo {} mode={} config={}",
        env!("CARGO_PKG_VERSION"),
        config.mode,
        config.to_json()
    )
}

pub fn render(config: &ExperimentConfig, out: &RunOutput, header: bool) -> String {
    match config.format {
        Format::Csv => output::to_csv(&out.table, header.then(|| header_comment(config)).as_deref()),
        Format::Json => output::to_json(&out.table, header.then(|| config.to_json())),
        Format::Svg => output::to_svg(&out.table, config.mode.as_str()),
    }
}

fn sidecar_path(output: &Path, mode: Mode) -> PathBuf {
    let suffix = match mode {
        Mode::ShortTime => "fit.json",
        _ => "sidecar.json",
    };
    let mut name = output.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

fn write_file(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|e| RunError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Runs a config to completion, writing artifacts, and returns the exit code.
/// Data goes to `config.output` or stdout; sidecars go next to the output
/// file, or to stderr when writing to stdout.
pub fn execute(config: &ExperimentConfig, header: bool) -> Result<i32, RunError> {
    let out = run(config)?;
    let text = render(config, &out, header);
    match &config.output {
        Some(path) => {
            write_file(path, &text)?;
            if let Some(side) = &out.sidecar {
                write_file(&sidecar_path(path, config.mode), &format!("{side:#}\n"))?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| RunError::Io {
                path: "<stdout>".into(),
                message: e.to_string(),
            })?;
            if let Some(side) = &out.sidecar {
                eprintln!("{side}");
            }
        }
    }
    if out.failed_checks.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("{}", json!({ "error": "validation", "failed_checks": out.failed_checks, "exit_code": EXIT_VALIDATION }));
        Ok(EXIT_VALIDATION)
    }
}

/// Machine-readable error record and exit code for a failed run.
pub fn error_record(err: &RunError) -> (serde_json::Value, i32) {
    let code = match err {
        RunError::Config(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    };
    (
        json!({ "error": err.kind(), "message": err.to_string(), "exit_code": code }),
        code,
    )
}
