use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::Result;

pub const TOOL: &str = "groupnet";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

/// CSV with a leading `# groupnet <version> config_sha256=<hash>` line.
pub fn write_csv(dir: &Path, name: &str, config: &ExperimentConfig, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut buf = format!("# {TOOL} {VERSION} config_sha256={}\n", config.sha256()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    fs::write(&path, buf)?;
    Ok(path)
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    tool: &'a str,
    version: &'a str,
    config_sha256: String,
    config: &'a ExperimentConfig,
    rows: &'a R,
}

pub fn write_json<R: Serialize>(dir: &Path, name: &str, config: &ExperimentConfig, rows: &R) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let env = Envelope { tool: TOOL, version: VERSION, config_sha256: config.sha256(), config, rows };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}
