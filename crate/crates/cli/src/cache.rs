//! Append-only JSON-lines store of search records.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use torus_ksys::SearchRecord;

#[derive(Debug)]
pub struct Cache {
    path: PathBuf,
    records: Vec<SearchRecord>,
}

impl Cache {
    /// Reads every record in `path`; a missing file is an empty cache.
    pub fn open(path: &Path) -> Result<Cache> {
        let mut records = Vec::new();
        if path.exists() {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let r: SearchRecord = serde_json::from_str(&line)
                    .with_context(|| format!("{}:{}: malformed record", path.display(), i + 1))?;
                records.push(r);
            }
        }
        Ok(Cache {
            path: path.to_path_buf(),
            records,
        })
    }

    /// The most recent record for `n`.
    pub fn get(&self, n: usize) -> Option<&SearchRecord> {
        self.records.iter().rev().find(|r| r.n == n)
    }

    pub fn append(&mut self, r: SearchRecord) -> Result<()> {
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .with_context(|| format!("opening {}", self.path.display()))?;
        writeln!(file, "{}", serde_json::to_string(&r)?)?;
        self.records.push(r);
        Ok(())
    }
}
