//! CSV and manifest emission. All floats are serialized with 17 significant
//! digits so re-runs with the same seed are byte-identical.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

pub struct CsvWriter {
    buf: String,
    columns: usize,
    path: PathBuf,
}

impl CsvWriter {
    pub fn create(path: PathBuf, header: &[&str]) -> CsvWriter {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        CsvWriter { buf, columns: header.len(), path }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "csv row width mismatch");
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> io::Result<PathBuf> {
        fs::write(&self.path, self.buf.as_bytes())?;
        Ok(self.path)
    }
}

/// Per-run manifest: flat key = value lines.
pub struct Manifest {
    entries: Vec<(String, String)>,
    started: Instant,
    path: PathBuf,
}

impl Manifest {
    pub fn begin(out_dir: &Path, subcommand: &str, config_hash: u64, seed: u64) -> Manifest {
        let mut m = Manifest {
            entries: Vec::new(),
            started: Instant::now(),
            path: out_dir.join(format!("{subcommand}.manifest")),
        };
        m.put("subcommand", subcommand);
        m.put("config_hash", format!("{config_hash:016x}"));
        m.put("seed", seed.to_string());
        m.put("version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn put(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn put_float(&mut self, key: &str, value: f64) {
        self.put(key, fmt_float(value));
    }

    /// Abort guard for resumed runs: an existing manifest for the same
    /// subcommand with a different config hash is an error.
    pub fn check_resume(&self) -> Result<(), String> {
        if let Ok(prev) = fs::read_to_string(&self.path) {
            let prev_hash = prev
                .lines()
                .find_map(|l| l.strip_prefix("config_hash = "))
                .unwrap_or("");
            let cur = self
                .entries
                .iter()
                .find(|(k, _)| k == "config_hash")
                .map(|(_, v)| v.as_str())
                .unwrap_or("");
            if !prev_hash.is_empty() && prev_hash != cur {
                return Err(format!(
                    "output dir holds results for config hash {prev_hash}, refusing to mix with {cur}"
                ));
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<()> {
        let wall = self.started.elapsed().as_millis();
        self.put("wall_ms", wall.to_string());
        let mut f = fs::File::create(&self.path)?;
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.125), "-1.2500000000000000e-1");
        let s = fmt_float(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
    }
}
