//! Result tables, CSV/JSON serialization, atomic writes and the cache.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const JSON_SCHEMA_VERSION: &str = "1";

/// Tabular result with full provenance metadata.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResultTable {
    pub schema_version: String,
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Resolved configuration and run information; every row is produced
    /// under exactly these parameters.
    pub metadata: BTreeMap<String, String>,
}

impl ResultTable {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        ResultTable {
            schema_version: JSON_SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.to_string(), value.to_string());
    }

    /// RFC 4180 CSV with '.' decimals and 17 significant digits; metadata
    /// rides in comment lines so the file round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema_version,{}\n", self.schema_version));
        out.push_str(&format!("# command,{}\n", self.command));
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {},{}\n", k, csv_quote(v)));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<ResultTable> {
        let mut schema_version = JSON_SCHEMA_VERSION.to_string();
        let mut command = String::new();
        let mut metadata = BTreeMap::new();
        let mut columns: Vec<String> = Vec::new();
        let mut rows = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest.split_once(',').context("malformed metadata line")?;
                match k {
                    "schema_version" => schema_version = v.to_string(),
                    "command" => command = v.to_string(),
                    _ => {
                        metadata.insert(k.to_string(), csv_unquote(v));
                    }
                }
            } else if columns.is_empty() {
                columns = line.split(',').map(|s| s.to_string()).collect();
            } else if !line.is_empty() {
                let row: Vec<f64> = line
                    .split(',')
                    .map(|s| s.parse::<f64>().context("bad number"))
                    .collect::<Result<_>>()?;
                rows.push(row);
            }
        }
        Ok(ResultTable {
            schema_version,
            command,
            columns,
            rows,
            metadata,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<ResultTable> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn csv_quote(v: &str) -> String {
    if v.contains(',') || v.contains('"') || v.contains('\n') {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

fn csv_unquote(v: &str) -> String {
    if v.starts_with('"') && v.ends_with('"') && v.len() >= 2 {
        v[1..v.len() - 1].replace("\"\"", "\"")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Write via a temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents.as_bytes())
            .with_context(|| format!("writing {}", tmp.display()))?;
        f.sync_all().ok();
    }
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

/// FNV-1a content hash used as the cache key.
pub fn content_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Cache { dir }
    }

    pub fn lookup(&self, key: u64) -> Option<ResultTable> {
        let dir = self.dir.as_ref()?;
        let path = dir.join(format!("{key:016x}.json"));
        let text = std::fs::read_to_string(path).ok()?;
        ResultTable::from_json(&text).ok()
    }

    pub fn store(&self, key: u64, table: &ResultTable) {
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{key:016x}.json"));
            let _ = write_atomic(&path, &table.to_json());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = ResultTable::new("f2", &["xi", "f2"]);
        t.meta("nodes", 48);
        t.meta("note", "a,b \"quoted\"");
        t.push(vec![0.0, 0.9693728283552627]);
        t.push(vec![-1.0, 0.8319080662019402]);
        let parsed = ResultTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(t, parsed);
    }

    #[test]
    fn json_round_trip() {
        let mut t = ResultTable::new("ftt", &["xi1", "value"]);
        t.meta("alpha", 0.5);
        t.push(vec![1.0, 0.25]);
        let parsed = ResultTable::from_json(&t.to_json()).unwrap();
        assert_eq!(t, parsed);
        assert_eq!(parsed.schema_version, "1");
    }

    #[test]
    fn hash_stable() {
        assert_eq!(content_hash("abc"), content_hash("abc"));
        assert_ne!(content_hash("abc"), content_hash("abd"));
    }
}
