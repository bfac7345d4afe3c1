//! Output files, number formatting and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL: &str = "erw";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON formatter writing every float with 17 significant digits.
struct Precise;

impl serde_json::ser::Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }
}

/// `x` with 17 significant digits; positional when the exponent is moderate.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

/// Shortest decimal that round-trips.
pub fn fmt_short(x: f64) -> String {
    format!("{x}")
}

pub fn to_json(value: &Value) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise);
    value.serialize(&mut ser).expect("serializing a JSON value cannot fail");
    out.push(b'\n');
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Record sufficient to rerun a command and check its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Full parameter echo of the command.
    pub args: Value,
    /// Digest of tool, version, command and args.
    pub id: String,
    pub timestamp: String,
    pub output: PathBuf,
    /// `sha256` of each output file.
    pub digests: BTreeMap<String, String>,
}

pub fn manifest_id(command: &str, args: &Value) -> String {
    let canonical = serde_json::json!({ "tool": TOOL, "version": VERSION, "command": command, "args": args });
    sha256_hex(&to_json(&canonical))
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Where a command writes its payload.
pub struct Sink {
    pub out: Option<PathBuf>,
}

impl Sink {
    /// Write `payload` to the output path (or stdout) and, for files, a
    /// manifest next to it.
    pub fn emit(&self, command: &str, args: &Value, payload: &[u8]) -> Result<Option<Manifest>, CliError> {
        let Some(path) = &self.out else {
            io::stdout().write_all(payload).map_err(|e| CliError::Io(format!("stdout: {e}")))?;
            return Ok(None);
        };
        fs::write(path, payload).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut digests = BTreeMap::new();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        digests.insert(name, sha256_hex(payload));
        let manifest = Manifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            args: args.clone(),
            id: manifest_id(command, args),
            timestamp: chrono::Utc::now().to_rfc3339(),
            output: path.clone(),
            digests,
        };
        let mpath = manifest_path(path);
        let body = to_json(&serde_json::to_value(&manifest).expect("manifest is plain data"));
        fs::write(&mpath, body).map_err(|e| CliError::Io(format!("{}: {e}", mpath.display())))?;
        Ok(Some(manifest))
    }
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--replay: {}: not a manifest: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.36, 1.0, -2.5e-9, 1e20, 1.0 / 3.0, 123456.789, f64::MIN_POSITIVE] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect::<String>();
            assert!(digits.trim_start_matches('0').len() >= 17, "{s}");
        }
        assert_eq!(fmt17(0.0), "0.0");
    }

    #[test]
    fn json_values_use_the_precise_formatter() {
        let v = serde_json::json!({ "x": 0.36, "n": 3 });
        let s = String::from_utf8(to_json(&v)).unwrap();
        assert_eq!(s, "{\"n\":3,\"x\":0.35999999999999999}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 0.36);
    }
}
