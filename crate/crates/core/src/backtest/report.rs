//! CSV tables and the JSON run manifest.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha1::{Digest, Sha1};

use super::stats::PnlStats;
use crate::error::{Error, Result};

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

/// Columns `t, q25, median, q75, mean, stdev`, one row per rebalance date.
pub fn write_stats_csv(path: &Path, stats: &PnlStats) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "q25", "median", "q75", "mean", "stdev"])?;
    for i in 0..stats.len() {
        w.serialize((
            stats.times[i],
            stats.q25[i],
            stats.median[i],
            stats.q75[i],
            stats.mean[i],
            stats.stdev[i],
        ))?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `path, pnl`.
pub fn write_terminal_csv(path: &Path, terminal: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["path", "pnl"])?;
    for (i, v) in terminal.iter().enumerate() {
        w.serialize((i, v))?;
    }
    w.flush()?;
    Ok(())
}

/// Git blob SHA-1 of the compact JSON encoding (keys sorted).
pub fn canonical_hash<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
    let bytes = serde_json::to_vec(&v).map_err(|e| Error::Io(e.to_string()))?;
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(&bytes);
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Written next to the CSV files of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub input_hash: String,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        f.write_all(text.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_hash_matches_git() {
        // `printf '{"a":1}' | git hash-object --stdin`
        let h = canonical_hash(&serde_json::json!({"a": 1})).unwrap();
        assert_eq!(h, "daa5053ecf5f9a37b2de733d0751cc1ab53ac010");
    }
}
