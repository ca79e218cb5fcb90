//! External repairers over a line-delimited JSON protocol.
//!
//! Request, one line on the adapter's stdin:
//! `{"constraints": ["C1: !(...)", ...], "table": {"schema": [...], "rows": [[...], ...]}}`
//!
//! Response, one line on its stdout: `{"table": {...}}` or `{"error": "..."}`.
//!
//! Adapter processes are long-lived and handle one request at a time; a pool
//! keeps up to `pool_size` of them.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{checked_repair, BlackBoxFailure, RepairAlgorithm, RepairError};
use crate::dc::{parse_dc, DenialConstraint};
use crate::table::{Table, TableDoc};

const STDERR_KEEP: usize = 4096;

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_pool_size() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterConfig {
    pub name: String,
    pub program: PathBuf,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
}

impl AdapterConfig {
    pub fn new(name: impl Into<String>, program: impl Into<PathBuf>) -> Self {
        AdapterConfig {
            name: name.into(),
            program: program.into(),
            args: Vec::new(),
            timeout_ms: default_timeout_ms(),
            pool_size: default_pool_size(),
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    /// Reads a registry file: `{"adapters": [AdapterConfig, ...]}`.
    pub fn load_registry(text: &str) -> Result<Vec<AdapterConfig>, serde_json::Error> {
        #[derive(Deserialize)]
        struct Registry {
            adapters: Vec<AdapterConfig>,
        }
        serde_json::from_str::<Registry>(text).map(|r| r.adapters)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdapterRequest {
    pub constraints: Vec<String>,
    pub table: TableDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AdapterResponse {
    Table { table: TableDoc },
    Error { error: String },
}

struct Worker {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<io::Result<String>>,
    stderr: Arc<Mutex<String>>,
    stderr_reader: Option<JoinHandle<()>>,
}

impl Worker {
    fn spawn(config: &AdapterConfig) -> Result<Worker, BlackBoxFailure> {
        let mut child = Command::new(&config.program)
            .args(&config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| BlackBoxFailure::Spawn(format!("{}: {e}", config.program.display())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut stderr_pipe = child.stderr.take().expect("piped stderr");

        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let stderr = Arc::new(Mutex::new(String::new()));
        let sink = Arc::clone(&stderr);
        let stderr_reader = thread::spawn(move || {
            let mut buf = [0u8; 1024];
            while let Ok(n) = stderr_pipe.read(&mut buf) {
                if n == 0 {
                    break;
                }
                let mut s = sink.lock().unwrap_or_else(|p| p.into_inner());
                s.push_str(&String::from_utf8_lossy(&buf[..n]));
                if s.len() > STDERR_KEEP {
                    let mut cut = s.len() - STDERR_KEEP;
                    while !s.is_char_boundary(cut) {
                        cut += 1;
                    }
                    s.drain(..cut);
                }
            }
        });
        Ok(Worker {
            child,
            stdin,
            lines,
            stderr,
            stderr_reader: Some(stderr_reader),
        })
    }

    fn exited(&mut self) -> BlackBoxFailure {
        let status = match self.child.wait() {
            Ok(s) => s.to_string(),
            Err(e) => format!("unknown ({e})"),
        };
        if let Some(h) = self.stderr_reader.take() {
            let _ = h.join();
        }
        let stderr = self
            .stderr
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .trim()
            .to_owned();
        BlackBoxFailure::Exited { status, stderr }
    }

    fn call(&mut self, request: &str, timeout: Duration) -> Result<String, BlackBoxFailure> {
        let sent = self
            .stdin
            .write_all(request.as_bytes())
            .and_then(|_| self.stdin.write_all(b"\n"))
            .and_then(|_| self.stdin.flush());
        if sent.is_err() {
            return Err(self.exited());
        }
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(BlackBoxFailure::Io(e.to_string())),
            Err(RecvTimeoutError::Timeout) => Err(BlackBoxFailure::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(self.exited()),
        }
    }
}

impl Drop for Worker {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[derive(Default)]
struct Pool {
    idle: Vec<Worker>,
    live: usize,
}

/// A repair algorithm implemented by an external executable.
pub struct ExternalRepair {
    config: AdapterConfig,
    pool: Mutex<Pool>,
    freed: Condvar,
}

impl ExternalRepair {
    /// Starts one adapter process eagerly so a bad executable path fails
    /// here rather than on first use.
    pub fn spawn(config: AdapterConfig) -> Result<ExternalRepair, RepairError> {
        let first = Worker::spawn(&config)?;
        Ok(ExternalRepair {
            config,
            pool: Mutex::new(Pool {
                idle: vec![first],
                live: 1,
            }),
            freed: Condvar::new(),
        })
    }

    pub fn config(&self) -> &AdapterConfig {
        &self.config
    }

    fn checkout(&self) -> Result<Worker, BlackBoxFailure> {
        let mut pool = self.pool.lock().unwrap_or_else(|p| p.into_inner());
        loop {
            if let Some(w) = pool.idle.pop() {
                return Ok(w);
            }
            if pool.live < self.config.pool_size.max(1) {
                pool.live += 1;
                drop(pool);
                return Worker::spawn(&self.config).inspect_err(|_| self.discard());
            }
            pool = self.freed.wait(pool).unwrap_or_else(|p| p.into_inner());
        }
    }

    fn checkin(&self, w: Worker) {
        self.pool
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .idle
            .push(w);
        self.freed.notify_one();
    }

    fn discard(&self) {
        self.pool.lock().unwrap_or_else(|p| p.into_inner()).live -= 1;
        self.freed.notify_one();
    }

    fn call(&self, request: &str) -> Result<AdapterResponse, BlackBoxFailure> {
        let mut worker = self.checkout()?;
        let reply = worker
            .call(request, self.config.timeout())
            .and_then(|line| {
                serde_json::from_str::<AdapterResponse>(&line)
                    .map_err(|e| BlackBoxFailure::Malformed(format!("{e}: {}", truncate(&line))))
            });
        match reply {
            Ok(r) => {
                self.checkin(worker);
                Ok(r)
            }
            Err(e) => {
                drop(worker);
                self.discard();
                Err(e)
            }
        }
    }
}

fn truncate(s: &str) -> String {
    match s.char_indices().nth(200) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_owned(),
    }
}

impl RepairAlgorithm for ExternalRepair {
    fn name(&self) -> &str {
        &self.config.name
    }

    fn repair(
        &self,
        constraints: &[DenialConstraint],
        dirty: &Table,
    ) -> Result<Table, RepairError> {
        let request = AdapterRequest {
            constraints: constraints.iter().map(ToString::to_string).collect(),
            table: TableDoc::from(dirty),
        };
        let line = serde_json::to_string(&request).expect("request serializes");
        match self.call(&line)? {
            AdapterResponse::Error { error } => Err(BlackBoxFailure::Reported(error).into()),
            AdapterResponse::Table { table } => {
                let table = Table::try_from(table)
                    .map_err(|e| RepairError::Contract(format!("{}: {e}", self.config.name)))?;
                if table.schema() != dirty.schema() || table.row_count() != dirty.row_count() {
                    return Err(RepairError::Contract(format!(
                        "{} returned a {}x{} table for a {}x{} input",
                        self.config.name,
                        table.row_count(),
                        table.width(),
                        dirty.row_count(),
                        dirty.width()
                    )));
                }
                Ok(table)
            }
        }
    }
}

/// The adapter side of the protocol: answers requests from `input` with
/// `alg` until end of input.
pub fn serve_adapter<R: BufRead, W: Write>(
    alg: &dyn RepairAlgorithm,
    input: R,
    mut output: W,
) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match answer(alg, &line) {
            Ok(table) => AdapterResponse::Table {
                table: TableDoc::from(&table),
            },
            Err(error) => AdapterResponse::Error { error },
        };
        serde_json::to_writer(&mut output, &response)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}

fn answer(alg: &dyn RepairAlgorithm, line: &str) -> Result<Table, String> {
    let req: AdapterRequest =
        serde_json::from_str(line).map_err(|e| format!("bad request: {e}"))?;
    let constraints = req
        .constraints
        .iter()
        .map(|s| parse_dc(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| format!("bad constraint: {e}"))?;
    let table = Table::try_from(req.table).map_err(|e| format!("bad table: {e}"))?;
    checked_repair(alg, &constraints, &table).map_err(|e| e.to_string())
}
