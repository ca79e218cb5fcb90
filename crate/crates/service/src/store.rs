//! Append-only session snapshots and job records under a data directory.
//!
//! ```text
//! <root>/sessions/<id>/<revision>-0-edit.json
//! <root>/sessions/<id>/<revision>-1-repair.json
//! <root>/jobs/<id>.json
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use xrepair_core::{CellChange, Table};

use crate::jobs::JobRecord;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub id: String,
    pub revision: u64,
    pub algorithm: String,
    pub table: Table,
    pub constraints: Vec<String>,
    #[serde(default)]
    pub clean: Option<Table>,
    #[serde(default)]
    pub changes: Option<Vec<CellChange>>,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> io::Result<T> {
    let bytes = fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

fn to_json<T: Serialize>(value: &T) -> io::Result<Vec<u8>> {
    serde_json::to_vec_pretty(value).map_err(io::Error::other)
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Store> {
        let root = root.into();
        fs::create_dir_all(root.join("sessions"))?;
        fs::create_dir_all(root.join("jobs"))?;
        Ok(Store { root })
    }

    fn session_dir(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(id)
    }

    pub fn save_session(&self, snap: &SessionSnapshot) -> io::Result<()> {
        let dir = self.session_dir(&snap.id);
        fs::create_dir_all(&dir)?;
        let kind = if snap.clean.is_some() {
            "1-repair"
        } else {
            "0-edit"
        };
        let path = dir.join(format!("{:010}-{kind}.json", snap.revision));
        write_atomic(&path, &to_json(snap)?)
    }

    /// The newest snapshot of every stored session.
    pub fn load_sessions(&self) -> io::Result<Vec<SessionSnapshot>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.root.join("sessions"))? {
            let dir = entry?.path();
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            if let Some(last) = files.last() {
                out.push(read_json(last)?);
            }
        }
        Ok(out)
    }

    pub fn delete_session(&self, id: &str) -> io::Result<()> {
        match fs::remove_dir_all(self.session_dir(id)) {
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(()),
            r => r,
        }
    }

    pub fn save_job(&self, job: &JobRecord) -> io::Result<()> {
        let path = self.root.join("jobs").join(format!("{}.json", job.id));
        write_atomic(&path, &to_json(job)?)
    }

    pub fn load_jobs(&self) -> io::Result<Vec<JobRecord>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.root.join("jobs"))? {
            let path = entry?.path();
            if path.extension().is_some_and(|x| x == "json") {
                out.push(read_json(&path)?);
            }
        }
        Ok(out)
    }

    pub fn delete_job(&self, id: &str) -> io::Result<()> {
        match fs::remove_file(self.root.join("jobs").join(format!("{id}.json"))) {
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(()),
            r => r,
        }
    }
}
