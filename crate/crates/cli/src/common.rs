//! Exit codes, provenance stamping and small output helpers shared by every
//! subcommand.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use layoutforge::metrics::MetricRecord;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const EXIT_PAIRING: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_PARSE, message)
    }
}

impl From<layoutforge::Error> for CliError {
    fn from(e: layoutforge::Error) -> Self {
        use layoutforge::Error as E;
        let code = match &e {
            E::Parse(_) | E::InconsistentAnnotation(_) | E::InvalidArgument(_) => EXIT_PARSE,
            E::Format(_) => EXIT_FORMAT,
            _ => EXIT_INTERNAL,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_INTERNAL, format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Failures tied to one input file, reported together at the end of a run.
#[derive(Debug, Default)]
pub struct ErrorListing {
    entries: Vec<(i32, String)>,
}

impl ErrorListing {
    pub fn push(&mut self, code: i32, message: impl Into<String>) {
        self.entries.push((code, message.into()));
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pairing problems outrank parse problems, which outrank the rest.
    pub fn exit_code(&self) -> Option<i32> {
        [EXIT_PAIRING, EXIT_PARSE, EXIT_FORMAT, EXIT_INTERNAL]
            .into_iter()
            .find(|c| self.entries.iter().any(|(code, _)| code == c))
    }

    pub fn into_error(self) -> Option<CliError> {
        let code = self.exit_code()?;
        let mut message = format!("{} file(s) failed:", self.entries.len());
        for (_, m) in &self.entries {
            let _ = write!(message, "\n  {m}");
        }
        Some(CliError::new(code, message))
    }
}

/// Who produced an artifact and from which configuration. Contains no
/// timestamps or host details so reruns stay byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    /// `config` should hold every input that influences the numbers and
    /// nothing about where the outputs go.
    pub fn new(command: &'static str, seed: u64, config: &Value) -> Self {
        // serde_json maps are ordered by key, so this text is canonical
        let canonical = serde_json::to_string(config).expect("config serializes");
        Self {
            tool: "layoutforge",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config_hash: hex::encode(Sha256::digest(canonical.as_bytes())),
        }
    }

    pub fn csv_comment(&self) -> String {
        format!(
            "# provenance tool={} version={} command={} seed={} config_hash={}",
            self.tool, self.version, self.command, self.seed, self.config_hash
        )
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::new(EXIT_INTERNAL, e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `provenance.json` with the full configuration next to the outputs.
pub fn write_run_provenance(dir: &Path, prov: &Provenance, config: &Value) -> CliResult<()> {
    write_json(
        &dir.join("provenance.json"),
        &json!({ "provenance": prov, "config": config }),
    )
}

/// Sidecar `<file>.prov.json` for binary artifacts.
pub fn write_sidecar_provenance(file: &Path, prov: &Provenance) -> CliResult<()> {
    let mut name = file.as_os_str().to_owned();
    name.push(".prov.json");
    write_json(Path::new(&name), &json!({ "provenance": prov }))
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::new(EXIT_INTERNAL, format!("{}: {e}", dir.display())))
}

/// `*.json` files of a directory keyed by file stem, sorted.
pub fn json_files(dir: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn metric_csv_header() -> String {
    format!("id,{}", MetricRecord::FIELDS.join(","))
}

pub fn metric_csv_row(id: &str, r: &MetricRecord) -> String {
    format!("{id},{},{},{},{}", r.iou2d, r.iou3d, r.rmse, r.delta1)
}

/// Parses `HxW`.
pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected HxW, got {s:?}"))?;
    let h: usize = h.trim().parse().map_err(|e| format!("height: {e}"))?;
    let w: usize = w.trim().parse().map_err(|e| format!("width: {e}"))?;
    if h == 0 || w != 2 * h {
        return Err(format!("resolution needs W = 2H, got {h}x{w}"));
    }
    Ok((h, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_parsing() {
        assert_eq!(parse_resolution("512x1024"), Ok((512, 1024)));
        assert!(parse_resolution("512x1000").is_err());
        assert!(parse_resolution("512").is_err());
    }

    #[test]
    fn config_hash_ignores_key_order() {
        let a = Provenance::new("eval", 1, &json!({"a": 1, "b": 2}));
        let b = Provenance::new("eval", 1, &json!({"b": 2, "a": 1}));
        assert_eq!(a.config_hash, b.config_hash);
        let c = Provenance::new("eval", 1, &json!({"a": 1, "b": 3}));
        assert_ne!(a.config_hash, c.config_hash);
    }

    #[test]
    fn listing_prefers_pairing_code() {
        let mut l = ErrorListing::default();
        assert_eq!(l.exit_code(), None);
        l.push(EXIT_PARSE, "x.json: bad");
        l.push(EXIT_PAIRING, "y: no prediction");
        assert_eq!(l.exit_code(), Some(EXIT_PAIRING));
    }
}
