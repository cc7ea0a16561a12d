use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Resolved inputs of one invocation; hashed into every output.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub params: Value,
    pub crystal: Value,
    pub experiment: Option<Value>,
}

impl Provenance {
    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
            "crystal": self.crystal,
            "experiment": self.experiment,
        })
    }

    pub fn sha256(&self) -> String {
        let canonical = serde_json::to_string(&self.to_value()).expect("provenance serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// CSV text preceded by `# config_sha256=` and `# config=` comment lines.
pub fn csv_document(
    prov: &Provenance,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<String, CliError> {
    let mut buf = Vec::new();
    writeln!(buf, "# config_sha256={}", prov.sha256())?;
    writeln!(buf, "# config={}", serde_json::to_string(&prov.to_value())?)?;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)
            .map_err(|e| CliError::Io(e.to_string()))?;
        for r in rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
}

/// JSON report with the provenance block next to the result.
pub fn json_document<T: Serialize>(prov: &Provenance, result: &T) -> Result<String, CliError> {
    let doc = json!({
        "config_sha256": prov.sha256(),
        "config": prov.to_value(),
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

/// Writes to `out` through a temporary file in the same directory and a
/// rename, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| CliError::Io(e.to_string()))?;
            Ok(())
        }
    }
}

/// Shortest round-trip representation of a float.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}
