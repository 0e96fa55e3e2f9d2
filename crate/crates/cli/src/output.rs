//! CSV writing and JSON sidecars. Floats use shortest-roundtrip formatting,
//! so files are byte-stable across runs and exact to re-parse.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliResult;

/// Sidecar path convention: `<out>.json` appended to the CSV path.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

pub struct CsvSink {
    file: Option<fs::File>,
    echo: bool,
    buffer: String,
}

impl CsvSink {
    /// Writes to `out` when given; echoes to stdout unless `quiet`.
    pub fn create(out: Option<&Path>, quiet: bool) -> CliResult<Self> {
        let file = match out {
            Some(p) => {
                if let Some(dir) = p.parent() {
                    if !dir.as_os_str().is_empty() {
                        fs::create_dir_all(dir)?;
                    }
                }
                Some(fs::File::create(p)?)
            }
            None => None,
        };
        Ok(Self { file, echo: !quiet, buffer: String::new() })
    }

    pub fn line(&mut self, line: &str) {
        self.buffer.push_str(line);
        self.buffer.push('\n');
    }

    pub fn finish(mut self) -> CliResult<()> {
        if let Some(f) = self.file.as_mut() {
            f.write_all(self.buffer.as_bytes())?;
            f.flush()?;
        } else if self.echo {
            print!("{}", self.buffer);
        }
        Ok(())
    }
}

/// Write the JSON sidecar next to the CSV (no-op without an output path).
pub fn write_sidecar(out: Option<&Path>, meta: &Value) -> CliResult<()> {
    if let Some(p) = out {
        let path = sidecar_path(p);
        let mut text = serde_json::to_string_pretty(meta)
            .map_err(|e| crate::CliError::Numerical(format!("sidecar: {e}")))?;
        text.push('\n');
        fs::write(path, text)?;
    }
    Ok(())
}

/// Common sidecar fields every command includes.
pub fn base_meta(model: &str, seed: Option<u64>) -> Value {
    let mut v = serde_json::json!({
        "model": model,
        "tool-version": env!("CARGO_PKG_VERSION"),
        "rng-id": lqgame_core::rng::RNG_ID,
    });
    if let Some(s) = seed {
        v["seed"] = s.into();
    }
    v
}
