//! Failure-to-exit-code mapping and report emission helpers.

use std::path::PathBuf;
use std::process::ExitCode;

use s3curl_core::Error as CoreError;

/// A command failure, split by exit code: usage and input problems exit
/// with `2`, mathematical self-check failures with `3`.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Math(String),
}

impl Failure {
    /// Prints the diagnostic on stderr and returns the process exit code.
    pub fn exit(self) -> ExitCode {
        match self {
            Failure::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            Failure::Math(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(3)
            }
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::TheoremContradiction(_) | CoreError::SearchFailed(_) => {
                Failure::Math(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Full-precision scientific notation for report numerics.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a finished report to the chosen destination in one call, so a
/// seeded rerun is byte-identical.
pub fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Usage(format!("cannot write to stdout: {e}")))
        }
    }
}

/// Renders rows of string records as CSV with the given header.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String, Failure> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    let bytes = writer.into_inner().expect("vec-backed csv writer");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Renders a serialisable report as pretty JSON with a trailing newline.
pub fn json_report<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}
