//! On-disk task database.
//!
//! ```text
//! <root>/master.json              master snapshot
//! <root>/tasks/<id>/task.json     task metadata
//! <root>/tasks/<id>/log.jsonl     one LogLine per event, append-only
//! ```
//!
//! Log appends are fsynced before the caller acknowledges. Whole-file
//! writes go through a temporary file and a rename.

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use gbbo_core::Configuration;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogState {
    Running,
    Completed,
    Failed,
}

/// One event of a trial. A trial has a `running` line when issued and at
/// most one `completed` or `failed` line afterwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub trial_id: u64,
    pub config: Configuration,
    /// `null` entries mark values that were not finite.
    #[serde(default)]
    pub objectives: Vec<Option<f64>>,
    #[serde(default)]
    pub constraints: Vec<Option<f64>>,
    pub state: LogState,
    #[serde(default)]
    pub elapsed_s: f64,
    pub ts: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskMeta {
    pub task_id: String,
    /// The validated task description, re-serialized.
    pub tdl: serde_json::Value,
    pub created_at: f64,
    pub seed: u64,
    #[serde(default)]
    pub workers: BTreeSet<String>,
}

#[derive(Clone, Debug)]
pub struct TaskDb {
    root: PathBuf,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ServiceError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    if let Some(dir) = path.parent() {
        // Persist the rename itself; not every platform allows opening a
        // directory, so failures here are ignored.
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

impl TaskDb {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let root = root.into();
        fs::create_dir_all(root.join("tasks"))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn task_dir(&self, id: &str) -> PathBuf {
        self.root.join("tasks").join(id)
    }

    pub fn log_path(&self, id: &str) -> PathBuf {
        self.task_dir(id).join("log.jsonl")
    }

    pub fn create_task(&self, meta: &TaskMeta) -> Result<(), ServiceError> {
        let dir = self.task_dir(&meta.task_id);
        fs::create_dir_all(&dir)?;
        File::create(dir.join("log.jsonl"))?.sync_all()?;
        self.write_meta(meta)
    }

    pub fn write_meta(&self, meta: &TaskMeta) -> Result<(), ServiceError> {
        let bytes = serde_json::to_vec_pretty(meta)?;
        write_atomic(&self.task_dir(&meta.task_id).join("task.json"), &bytes)
    }

    pub fn read_meta(&self, id: &str) -> Result<TaskMeta, ServiceError> {
        // Ids come from the wire; refuse anything that could escape the root.
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(ServiceError::UnknownTask(id.to_owned()));
        }
        let path = self.task_dir(id).join("task.json");
        match fs::read(&path) {
            Ok(b) => Ok(serde_json::from_slice(&b)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(ServiceError::UnknownTask(id.to_owned()))
            }
            Err(e) => Err(e.into()),
        }
    }

    pub fn task_ids(&self) -> Result<Vec<String>, ServiceError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(self.root.join("tasks"))? {
            let entry = entry?;
            if entry.path().join("task.json").exists() {
                ids.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Appends one line and fsyncs before returning.
    pub fn append(&self, id: &str, line: &LogLine) -> Result<(), ServiceError> {
        let mut bytes = serde_json::to_vec(line)?;
        bytes.push(b'\n');
        let mut f = OpenOptions::new().append(true).open(self.log_path(id))?;
        f.write_all(&bytes)?;
        f.sync_data()?;
        Ok(())
    }

    /// All complete lines. A torn final line (no newline, or unparsable
    /// with nothing after it) is ignored.
    pub fn read_log(&self, id: &str) -> Result<Vec<LogLine>, ServiceError> {
        let f = match File::open(self.log_path(id)) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ServiceError::UnknownTask(id.to_owned()))
            }
            Err(e) => return Err(e.into()),
        };
        let mut out = Vec::new();
        let mut reader = BufReader::new(f);
        let mut buf = String::new();
        loop {
            buf.clear();
            if reader.read_line(&mut buf)? == 0 {
                break;
            }
            if !buf.ends_with('\n') {
                tracing::warn!(task = id, "ignoring torn final log line");
                break;
            }
            match serde_json::from_str(buf.trim_end()) {
                Ok(line) => out.push(line),
                Err(e) => {
                    return Err(ServiceError::Storage(format!(
                        "corrupt log line {} of task {id}: {e}",
                        out.len() + 1
                    )))
                }
            }
        }
        Ok(out)
    }

    pub fn write_snapshot<T: Serialize>(&self, snap: &T) -> Result<(), ServiceError> {
        write_atomic(&self.root.join("master.json"), &serde_json::to_vec_pretty(snap)?)
    }

    pub fn read_snapshot<T: DeserializeOwned>(&self) -> Result<Option<T>, ServiceError> {
        match fs::read(self.root.join("master.json")) {
            Ok(b) => Ok(Some(serde_json::from_slice(&b)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}
