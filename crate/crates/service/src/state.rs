use std::collections::HashMap;
use std::io;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use serde::Serialize;
use tokio::sync::{mpsc, RwLock as AsyncRwLock};
use xrepair_core::repair::{
    probe_determinism, AdapterConfig, ExternalRepair, ReferenceRepair, RepairAlgorithm,
};
use xrepair_core::{fixture, parse_dcs, CellChange, DenialConstraint, Table};

use crate::error::ApiError;
use crate::jobs::{compute, JobRecord, JobStatus};
use crate::store::{SessionSnapshot, Store};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    /// Threads used by one explanation job.
    pub workers: usize,
    pub adapters: Vec<AdapterConfig>,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> ServiceConfig {
        ServiceConfig {
            data_dir: data_dir.into(),
            workers: 1,
            adapters: Vec::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("data directory: {0}")]
    Store(#[from] io::Error),
    #[error("adapter {name}: {message}")]
    Adapter { name: String, message: String },
}

#[derive(Debug, Clone)]
pub struct Repaired {
    pub clean: Table,
    pub changes: Vec<CellChange>,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub revision: u64,
    pub algorithm: String,
    pub dirty: Table,
    pub constraints: Vec<DenialConstraint>,
    /// Present iff a repair has run at the current revision.
    pub repaired: Option<Repaired>,
}

#[derive(Debug, Serialize)]
pub struct SessionView<'a> {
    pub id: &'a str,
    pub revision: u64,
    pub algorithm: &'a str,
    pub table: &'a Table,
    pub constraints: Vec<String>,
    pub clean: Option<&'a Table>,
    pub changes: Option<&'a [CellChange]>,
}

impl Session {
    pub fn view(&self) -> SessionView<'_> {
        SessionView {
            id: &self.id,
            revision: self.revision,
            algorithm: &self.algorithm,
            table: &self.dirty,
            constraints: self.constraints.iter().map(ToString::to_string).collect(),
            clean: self.repaired.as_ref().map(|r| &r.clean),
            changes: self.repaired.as_ref().map(|r| r.changes.as_slice()),
        }
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            id: self.id.clone(),
            revision: self.revision,
            algorithm: self.algorithm.clone(),
            table: self.dirty.clone(),
            constraints: self.constraints.iter().map(ToString::to_string).collect(),
            clean: self.repaired.as_ref().map(|r| r.clean.clone()),
            changes: self.repaired.as_ref().map(|r| r.changes.clone()),
        }
    }

    fn restore(snap: SessionSnapshot) -> io::Result<Session> {
        let constraints = parse_dcs(&snap.constraints.join("\n"))
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
        let repaired = match (snap.clean, snap.changes) {
            (Some(clean), Some(changes)) => Some(Repaired { clean, changes }),
            _ => None,
        };
        Ok(Session {
            id: snap.id,
            revision: snap.revision,
            algorithm: snap.algorithm,
            dirty: snap.table,
            constraints,
            repaired,
        })
    }
}

pub type SessionHandle = Arc<AsyncRwLock<Session>>;

struct Inner {
    store: Store,
    sessions: RwLock<HashMap<String, SessionHandle>>,
    jobs: Mutex<HashMap<String, JobRecord>>,
    algorithms: HashMap<String, Arc<dyn RepairAlgorithm>>,
    workers: usize,
    queue: mpsc::UnboundedSender<String>,
}

/// Shared service state. Cheap to clone.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    /// Opens the data directory, starts the adapters, reloads sessions and
    /// jobs, and requeues every job that had not finished. Must be called
    /// inside a tokio runtime.
    pub fn open(config: ServiceConfig) -> Result<AppState, StartupError> {
        let store = Store::open(&config.data_dir)?;
        let mut algorithms: HashMap<String, Arc<dyn RepairAlgorithm>> = HashMap::new();
        algorithms.insert("reference".into(), Arc::new(ReferenceRepair::default()));
        for adapter in config.adapters {
            let name = adapter.name.clone();
            let fail = |message: String| StartupError::Adapter {
                name: name.clone(),
                message,
            };
            let ext = ExternalRepair::spawn(adapter).map_err(|e| fail(e.to_string()))?;
            probe_determinism(&ext, &fixture::constraints(), &fixture::dirty())
                .map_err(|e| fail(e.to_string()))?;
            algorithms.insert(name, Arc::new(ext));
        }

        let mut sessions = HashMap::new();
        for snap in store.load_sessions()? {
            let s = Session::restore(snap)?;
            sessions.insert(s.id.clone(), Arc::new(AsyncRwLock::new(s)));
        }
        let mut jobs = HashMap::new();
        let mut requeue = Vec::new();
        for mut job in store.load_jobs()? {
            if matches!(job.status, JobStatus::Pending | JobStatus::Running) {
                job.status = JobStatus::Pending;
                requeue.push(job.id.clone());
            }
            jobs.insert(job.id.clone(), job);
        }
        requeue.sort();

        let (tx, rx) = mpsc::unbounded_channel();
        let state = AppState {
            inner: Arc::new(Inner {
                store,
                sessions: RwLock::new(sessions),
                jobs: Mutex::new(jobs),
                algorithms,
                workers: config.workers.max(1),
                queue: tx,
            }),
        };
        for id in requeue {
            state.enqueue(id);
        }
        tokio::spawn(run_jobs(state.clone(), rx));
        Ok(state)
    }

    pub fn store(&self) -> &Store {
        &self.inner.store
    }

    pub fn algorithm(&self, name: &str) -> Option<Arc<dyn RepairAlgorithm>> {
        self.inner.algorithms.get(name).cloned()
    }

    pub fn algorithm_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.inner.algorithms.keys().map(String::as_str).collect();
        names.sort();
        names
    }

    pub fn session(&self, id: &str) -> Result<SessionHandle, ApiError> {
        self.inner
            .sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session"))
    }

    pub fn insert_session(&self, session: Session) -> Result<SessionHandle, ApiError> {
        self.persist(&session)?;
        let id = session.id.clone();
        let handle = Arc::new(AsyncRwLock::new(session));
        self.inner
            .sessions
            .write()
            .unwrap()
            .insert(id, handle.clone());
        Ok(handle)
    }

    pub fn persist(&self, session: &Session) -> Result<(), ApiError> {
        self.inner
            .store
            .save_session(&session.snapshot())
            .map_err(|e| ApiError::internal(format!("could not persist session: {e}")))
    }

    /// Removes a session together with all of its jobs.
    pub fn remove_session(&self, id: &str) -> Result<(), ApiError> {
        if self.inner.sessions.write().unwrap().remove(id).is_none() {
            return Err(ApiError::not_found("session"));
        }
        let doomed: Vec<String> = {
            let mut jobs = self.inner.jobs.lock().unwrap();
            let ids: Vec<String> = jobs
                .values()
                .filter(|j| j.session == id)
                .map(|j| j.id.clone())
                .collect();
            for j in &ids {
                jobs.remove(j);
            }
            ids
        };
        let io = |e: io::Error| ApiError::internal(e.to_string());
        for j in doomed {
            self.inner.store.delete_job(&j).map_err(io)?;
        }
        self.inner.store.delete_session(id).map_err(io)
    }

    pub fn workers(&self) -> usize {
        self.inner.workers
    }

    pub fn job(&self, id: &str) -> Option<JobRecord> {
        self.inner.jobs.lock().unwrap().get(id).cloned()
    }

    /// Current revision of a session, if it still exists.
    pub async fn revision_of(&self, session: &str) -> Option<u64> {
        let handle = self.inner.sessions.read().unwrap().get(session).cloned()?;
        let rev = handle.read().await.revision;
        Some(rev)
    }

    pub fn submit(&self, job: JobRecord) -> Result<(), ApiError> {
        self.save_job(&job)?;
        let id = job.id.clone();
        self.inner.jobs.lock().unwrap().insert(id.clone(), job);
        self.enqueue(id);
        Ok(())
    }

    fn enqueue(&self, id: String) {
        // the receiver lives as long as the runtime
        let _ = self.inner.queue.send(id);
    }

    fn save_job(&self, job: &JobRecord) -> Result<(), ApiError> {
        self.inner
            .store
            .save_job(job)
            .map_err(|e| ApiError::internal(format!("could not persist job: {e}")))
    }

    // Applies `f` to a job that still exists, then persists it.
    fn update_job(&self, id: &str, f: impl FnOnce(&mut JobRecord)) -> Option<JobRecord> {
        let updated = {
            let mut jobs = self.inner.jobs.lock().unwrap();
            let job = jobs.get_mut(id)?;
            f(job);
            job.clone()
        };
        let _ = self.save_job(&updated);
        Some(updated)
    }
}

async fn run_jobs(state: AppState, mut rx: mpsc::UnboundedReceiver<String>) {
    while let Some(id) = rx.recv().await {
        let Some(job) = state.update_job(&id, |j| j.status = JobStatus::Running) else {
            continue;
        };
        let outcome = match state.algorithm(&job.algorithm) {
            None => Err(format!("unknown algorithm {:?}", job.algorithm)),
            Some(alg) => {
                let workers = state.workers();
                tokio::task::spawn_blocking(move || {
                    compute(alg, &job, workers)
                        .and_then(|r| serde_json::to_value(r).map_err(|e| e.to_string()))
                })
                .await
                .unwrap_or_else(|e| Err(format!("job panicked: {e}")))
            }
        };
        state.update_job(&id, |j| match outcome {
            Ok(report) => {
                j.status = JobStatus::Done;
                j.result = Some(report);
            }
            Err(e) => {
                j.status = JobStatus::Failed;
                j.error = Some(e);
            }
        });
    }
}
