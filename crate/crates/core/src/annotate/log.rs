//! Append-only JSONL event log. One line per accepted write:
//! `{seq, time, item_id, event, payload}`.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::AnnotateError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    pub time: DateTime<Utc>,
    pub item_id: String,
    pub event: String,
    pub payload: Value,
}

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
}

fn log_err(path: &Path, e: impl std::fmt::Display) -> AnnotateError {
    AnnotateError::Log(format!("{}: {e}", path.display()))
}

impl EventLog {
    /// Opens (creating if needed) the log and returns every complete record.
    /// A final line without a newline is a torn write and is dropped from
    /// the file; any other malformed line is an error.
    pub fn open(path: &Path) -> Result<(EventLog, Vec<EventRecord>), AnnotateError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| log_err(dir, e))?;
        }
        let mut records = Vec::new();
        let mut valid_len = 0u64;
        let body = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(log_err(path, e)),
        };
        for (i, line) in body.split_inclusive(|&b| b == b'\n').enumerate() {
            let Some(line) = line.strip_suffix(b"\n") else {
                log::warn!("{}: dropping torn final line {}", path.display(), i + 1);
                break;
            };
            valid_len += line.len() as u64 + 1;
            if line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let rec: EventRecord =
                serde_json::from_slice(line).map_err(|e| log_err(path, format!("line {}: {e}", i + 1)))?;
            let expected = records.len() as u64 + 1;
            if rec.seq != expected {
                return Err(log_err(
                    path,
                    format!("line {}: expected seq {expected}, found {}", i + 1, rec.seq),
                ));
            }
            records.push(rec);
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| log_err(path, e))?;
        if file.metadata().map_err(|e| log_err(path, e))?.len() != valid_len {
            file.set_len(valid_len).map_err(|e| log_err(path, e))?;
        }
        Ok((
            EventLog {
                path: path.to_path_buf(),
                file,
            },
            records,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes one record and flushes it to the OS before returning.
    pub fn append(&mut self, record: &EventRecord) -> Result<(), AnnotateError> {
        let mut line = serde_json::to_vec(record).map_err(|e| log_err(&self.path, e))?;
        line.push(b'\n');
        self.file.write_all(&line).map_err(|e| log_err(&self.path, e))?;
        self.file.flush().map_err(|e| log_err(&self.path, e))
    }

    /// Forces written records to stable storage.
    pub fn sync(&mut self) -> Result<(), AnnotateError> {
        self.file.sync_data().map_err(|e| log_err(&self.path, e))
    }
}
