//! HTTP front end for interactive repair sessions.
//!
//! A session holds a dirty table, its constraints and the chosen repair
//! algorithm. Every edit bumps the session revision and drops the cached
//! repair; explanation jobs run in the background against a frozen copy of
//! the revision they were submitted at.

mod error;
mod jobs;
mod routes;
mod state;
mod store;

use std::net::SocketAddr;

pub use error::{ApiError, Diagnostic};
pub use jobs::{CellMethod, ExplainParams, JobRecord, JobStatus, DEFAULT_SAMPLES};
pub use routes::router;
pub use state::{AppState, ServiceConfig, Session, StartupError};
pub use store::{SessionSnapshot, Store};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Startup(#[from] StartupError),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// Binds `addr` and serves until ctrl-c. `on_ready` receives the bound
/// address, which differs from `addr` when port 0 was requested.
pub async fn serve(
    config: ServiceConfig,
    addr: SocketAddr,
    on_ready: impl FnOnce(SocketAddr),
) -> Result<(), ServeError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind { addr, source })?;
    let state = AppState::open(config)?;
    on_ready(listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
