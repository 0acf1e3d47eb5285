use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use serde::Serialize;
use tempfile::NamedTempFile;

/// A run that could not produce a report.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: u8,
}

impl Failure {
    pub fn usage(message: String) -> Self {
        Self { kind: "usage", message, exit_code: 2 }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            kind: "io",
            message: format!("{}: {e}", path.display()),
            exit_code: 2,
        }
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("{}", serde_json::to_string(self).expect("serializable"));
        ExitCode::from(self.exit_code)
    }
}

impl From<qrf_core::Error> for Failure {
    fn from(e: qrf_core::Error) -> Self {
        let kind = match e {
            qrf_core::Error::Json(_) => "malformed-input",
            _ => "invalid-input",
        };
        Self { kind, message: e.to_string(), exit_code: 2 }
    }
}

/// Verification verdict of a run whose report has already been written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<String>,
    pub unconverged: bool,
}

#[derive(Serialize)]
struct Verdict<'a> {
    status: &'a str,
    reasons: &'a [String],
    exit_code: u8,
}

impl Outcome {
    /// Failed checks take precedence over a solver that stopped at a bracket.
    pub fn finish(self) -> ExitCode {
        let (status, code) = if !self.failures.is_empty() {
            ("verification-failed", 1)
        } else if self.unconverged {
            ("solver-bounds", 3)
        } else {
            return ExitCode::SUCCESS;
        };
        let reasons = if self.failures.is_empty() {
            vec!["diamond-norm solver did not converge; the upper bound was used".to_string()]
        } else {
            self.failures
        };
        let v = Verdict { status, reasons: &reasons, exit_code: code };
        eprintln!("{}", serde_json::to_string(&v).expect("serializable"));
        ExitCode::from(code)
    }
}

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| Failure::io(Path::new("<stdout>"), e));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Failure::io(dir, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| Failure::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Failure::io(path, e.error))?;
    Ok(())
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}
