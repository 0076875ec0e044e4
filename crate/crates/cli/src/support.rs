//! Shared plumbing: the exit-code-carrying error type, secret loading,
//! alphabet parsing, and atomic output writing.

use std::env;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ppsm::encoding::{Alphabet, Slot};
use ppsm::eval::EvalError;
use ppsm::protocol::ProtocolError;

/// A failure with the process exit code it maps to: 1 usage, 2 parameter
/// mismatch between parties, 3 malformed or unencodable input, 4 internal.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    /// Printed to stderr; empty when the message was already printed.
    pub message: String,
}

pub type CliResult<T> = Result<T, Failure>;

pub fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

pub fn bad_data(message: impl Into<String>) -> Failure {
    Failure { code: 3, message: message.into() }
}

pub fn internal(message: impl Into<String>) -> Failure {
    Failure { code: 4, message: message.into() }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        Failure { code: e.exit_code() as u8, message: e.to_string() }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::MethodParams { .. } => 1,
            EvalError::Pair { .. } | EvalError::Input(_) | EvalError::Csv(_) => 3,
            EvalError::Io(_) => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Loads a secret from a file flag or, failing that, an environment
/// variable. The secret's value never appears in any message or output.
pub fn load_secret(
    file: Option<&PathBuf>,
    env_var: &str,
    flag: &str,
) -> CliResult<String> {
    if let Some(path) = file {
        let raw = fs::read_to_string(path).map_err(|e| {
            usage(format!("cannot read {flag} file {}: {e}", path.display()))
        })?;
        let value = raw.trim_end_matches(['\r', '\n']);
        if value.is_empty() {
            return Err(usage(format!("{flag} file {} is empty", path.display())));
        }
        return Ok(value.to_string());
    }
    match env::var(env_var) {
        Ok(value) if !value.is_empty() => Ok(value),
        _ => Err(usage(format!("a secret is required: pass {flag} or set {env_var}"))),
    }
}

/// Parses an alphabet spec: a named preset or the literal symbols.
pub fn parse_alphabet(spec: &str) -> CliResult<Alphabet> {
    match spec {
        "digits" => Ok(Alphabet::digits()),
        "letters" => Ok(Alphabet::lowercase_letters()),
        "alphanumeric" => Ok(Alphabet::alphanumeric()),
        literal => Alphabet::from_chars(literal.chars())
            .map_err(|e| usage(format!("invalid alphabet {literal:?}: {e}"))),
    }
}

/// Writes bytes to a file atomically: a temporary file in the target
/// directory, then a rename over the final path.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| {
        internal(format!("cannot create temporary file in {}: {e}", dir.display()))
    })?;
    tmp.write_all(bytes)
        .and_then(|()| tmp.flush())
        .map_err(|e| internal(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| internal(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}

/// Sends bytes to the given file (atomically) or to stdout.
pub fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => atomic_write(path, bytes),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| internal(format!("cannot write to stdout: {e}"))),
    }
}

/// One-token rendering of a first-position encoding for CSV cells.
pub fn render_slot(slot: &Slot) -> String {
    match slot {
        Slot::Digest(d) => d.iter().map(|b| format!("{b:02x}")).collect(),
        Slot::Residue(r) => format!("residue:{r}"),
    }
}
