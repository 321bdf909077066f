//! HTTP facade for examd.
//!
//! Binds the store, authenticator and session manager behind a JSON API
//! authenticated with `Authorization: Bearer <token>`. All deadlines are
//! computed from the server clock; request bodies may carry a client time,
//! which is ignored.

mod error;
mod routes;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock, RwLockReadGuard, RwLockWriteGuard};
use std::time::Duration;

use examd_core::auth::{Authenticator, PasswordPolicy, DEFAULT_TOKEN_TTL_SECS};
use examd_core::session::{Finalized, SessionManager};
use examd_core::store::{import_questions, parse_bank, Store, StoreError, StoredResult};
use examd_core::{Clock, ExamBlueprint};
use thiserror::Error;
use tokio::net::TcpListener;

pub use error::{ApiError, ErrorCode};
pub use routes::router;

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    pub store_path: PathBuf,
    /// Question bank imported into the store at boot.
    pub bank_path: Option<PathBuf>,
    pub blueprint: ExamBlueprint,
    /// Built web client, served under `/` when set.
    pub static_dir: Option<PathBuf>,
    pub password_policy: PasswordPolicy,
    pub token_ttl_secs: u64,
    pub sweep_interval: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            store_path: PathBuf::from("store.dat"),
            bank_path: None,
            blueprint: ExamBlueprint::default(),
            static_dir: None,
            password_policy: PasswordPolicy::default(),
            token_ttl_secs: DEFAULT_TOKEN_TTL_SECS,
            sweep_interval: Duration::from_secs(1),
        }
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot read question bank {path}: {source}")]
    BankRead {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("question bank {path}: {message}")]
    BankInvalid { path: PathBuf, message: String },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// Everything a request handler can reach.
pub struct AppState {
    store: RwLock<Store>,
    pub auth: Authenticator,
    pub sessions: SessionManager,
    pub blueprint: Arc<ExamBlueprint>,
    pub clock: Arc<dyn Clock>,
    /// Finished attempts not yet durably stored.
    pending: Mutex<Vec<StoredResult>>,
}

impl AppState {
    pub fn new(store: Store, config: &ServerConfig, clock: Arc<dyn Clock>) -> Self {
        AppState {
            store: RwLock::new(store),
            auth: Authenticator::new(config.password_policy, config.token_ttl_secs),
            sessions: SessionManager::new(),
            blueprint: Arc::new(config.blueprint.clone()),
            clock,
            pending: Mutex::new(Vec::new()),
        }
    }

    pub fn store(&self) -> RwLockReadGuard<'_, Store> {
        self.store.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn store_mut(&self) -> RwLockWriteGuard<'_, Store> {
        self.store.write().unwrap_or_else(|e| e.into_inner())
    }

    fn to_stored(&self, done: Finalized) -> StoredResult {
        let store = self.store();
        let (first, last) = store
            .get_user(&done.candidate)
            .map(|u| (u.first_name.clone(), u.last_name.clone()))
            .unwrap_or_else(|| (done.candidate.clone(), String::new()));
        StoredResult {
            username: done.candidate,
            first_name: first,
            last_name: last,
            per_category_score: done.report.per_category_score,
            final_score: done.report.final_score,
            elapsed_secs: done.report.elapsed_secs,
            submitted_at: done.at,
            outcome: Some(done.outcome),
        }
    }

    /// Moves newly finalized sessions into the results log. Results whose
    /// write fails stay queued and are retried on the next call. Returns
    /// whether the queue is empty afterwards.
    pub fn persist_finalized(&self) -> bool {
        let fresh: Vec<StoredResult> = self
            .sessions
            .take_finalized()
            .into_iter()
            .map(|f| self.to_stored(f))
            .collect();
        let mut pending = self.pending.lock().unwrap_or_else(|e| e.into_inner());
        pending.extend(fresh);
        if pending.is_empty() {
            return true;
        }
        let mut store = self.store_mut();
        let mut written = 0;
        for r in pending.iter() {
            match store.append_result(r.clone()) {
                Ok(()) => written += 1,
                Err(e) => {
                    tracing::error!(candidate = %r.username, "result not persisted, will retry: {e}");
                    break;
                }
            }
        }
        pending.drain(..written);
        pending.is_empty()
    }

    pub fn pending_results(&self) -> usize {
        self.pending.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    /// Expires overdue sessions and persists anything finalized.
    pub fn sweep(&self) {
        let now = self.clock.now();
        let done = self.sessions.expire_sweep(now);
        if !done.is_empty() {
            tracing::info!(count = done.len(), "expired overdue sessions");
        }
        self.persist_finalized();
        self.auth.purge_expired(now);
    }
}

/// Opens the store, applies the boot-time bank import and builds the state.
pub fn prepare_state(config: &ServerConfig, clock: Arc<dyn Clock>) -> Result<AppState, ServeError> {
    let mut store = Store::open(&config.store_path)?;
    let rec = store.recovery();
    if rec.dropped_tail_bytes > 0 {
        tracing::warn!(
            bytes = rec.dropped_tail_bytes,
            "dropped torn final record from store"
        );
    }
    if let Some(path) = &config.bank_path {
        let text = std::fs::read_to_string(path).map_err(|source| ServeError::BankRead {
            path: path.clone(),
            source,
        })?;
        let bank = parse_bank(&text).map_err(|e| ServeError::BankInvalid {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let report = import_questions(&mut store, bank)?;
        if !report.rejected.is_empty() {
            let ids: Vec<String> = report.rejected.iter().map(|r| r.id.to_string()).collect();
            return Err(ServeError::BankInvalid {
                path: path.clone(),
                message: format!("invalid questions: {}", ids.join(", ")),
            });
        }
        tracing::info!(imported = report.imported, "question bank imported");
    }
    let bank_report = examd_core::validate_bank(&store.list_questions(None), &config.blueprint);
    if !bank_report.is_ok() {
        tracing::warn!("question bank cannot fill an exam yet: {bank_report}");
    }
    Ok(AppState::new(store, config, clock))
}

/// A bound, not yet running server.
pub struct Server {
    listener: TcpListener,
    state: Arc<AppState>,
    config: ServerConfig,
}

impl Server {
    pub async fn bind(config: ServerConfig, clock: Arc<dyn Clock>) -> Result<Server, ServeError> {
        let state = Arc::new(prepare_state(&config, clock)?);
        let listener =
            TcpListener::bind(config.listen)
                .await
                .map_err(|source| ServeError::Bind {
                    addr: config.listen,
                    source,
                })?;
        Ok(Server {
            listener,
            state,
            config,
        })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn state(&self) -> Arc<AppState> {
        self.state.clone()
    }

    /// Serves until `shutdown` resolves, then flushes pending results.
    pub async fn run(
        self,
        shutdown: impl std::future::Future<Output = ()> + Send + 'static,
    ) -> Result<(), ServeError> {
        let app = router(self.state.clone(), self.config.static_dir.as_deref());
        let sweeper = {
            let state = self.state.clone();
            let every = self.config.sweep_interval;
            tokio::spawn(async move {
                let mut tick = tokio::time::interval(every);
                loop {
                    tick.tick().await;
                    state.sweep();
                }
            })
        };
        let result = axum::serve(self.listener, app)
            .with_graceful_shutdown(shutdown)
            .await;
        sweeper.abort();
        if !self.state.persist_finalized() {
            tracing::error!(
                pending = self.state.pending_results(),
                "shutting down with unpersisted results"
            );
        }
        result.map_err(ServeError::Io)
    }
}

/// Binds and serves until Ctrl-C.
pub async fn serve(config: ServerConfig, clock: Arc<dyn Clock>) -> Result<(), ServeError> {
    let server = Server::bind(config, clock).await?;
    tracing::info!(addr = %server.local_addr()?, "listening");
    server
        .run(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
