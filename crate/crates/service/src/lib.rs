//! HTTP+JSON facade over a categorization session.
//!
//! All mutations go through one writer, in arrival order, and publish an
//! immutable snapshot that readers load without locking. Every response
//! carries the revision it reflects, in the `x-revision` header and, for
//! JSON bodies, as `{"revision": .., "data": ..}`.

mod error;
mod routes;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use arc_swap::ArcSwap;
use padkit_core::categorizer::{Session, SessionError};
use padkit_core::{Corpus, ValidationReport};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::{watch, Mutex};

pub use error::ApiError;
pub use routes::router;

pub const REVISION_HEADER: &str = "x-revision";

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("corpus is invalid:\n{0}")]
    InvalidCorpus(ValidationReport),
    #[error("port {port} is already in use")]
    PortBusy { port: u16 },
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Default destination of `POST /api/save`.
    pub save_path: Option<PathBuf>,
}

/// State visible to readers at one revision.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub revision: u64,
    pub session: Session,
}

impl Snapshot {
    pub fn corpus(&self) -> &Corpus {
        self.session.corpus()
    }
}

pub struct AppState {
    session_id: String,
    config: ServiceConfig,
    writer: Mutex<Session>,
    snapshot: ArcSwap<Snapshot>,
    revisions: watch::Sender<u64>,
}

impl AppState {
    pub fn new(corpus: Corpus, config: ServiceConfig) -> Result<Arc<Self>, ServiceError> {
        let session = Session::new(corpus).map_err(|err| match err {
            SessionError::Invalid(report) => ServiceError::InvalidCorpus(report),
            other => ServiceError::InvalidCorpus(ValidationReport {
                errors: vec![padkit_core::Issue {
                    location: padkit_core::Location::Corpus,
                    severity: padkit_core::Severity::Error,
                    message: other.to_string(),
                }],
            }),
        })?;
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos());
        let snapshot = Snapshot {
            revision: session.revision(),
            session: session.clone(),
        };
        let (revisions, _) = watch::channel(snapshot.revision);
        Ok(Arc::new(AppState {
            session_id: format!("{:x}-{:x}", std::process::id(), nanos),
            config,
            writer: Mutex::new(session),
            snapshot: ArcSwap::from_pointee(snapshot),
            revisions,
        }))
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.load_full()
    }

    pub fn revision(&self) -> u64 {
        self.snapshot.load().revision
    }

    /// Runs `op` as the single writer. A revision bump publishes a new
    /// snapshot before the lock is released.
    pub(crate) async fn mutate<T>(
        &self,
        op: impl FnOnce(&mut Session) -> Result<T, SessionError>,
    ) -> Result<(u64, T), ApiError> {
        let mut session = self.writer.lock().await;
        let before = session.revision();
        match op(&mut session) {
            Ok(value) => {
                let revision = session.revision();
                if revision != before {
                    self.snapshot.store(Arc::new(Snapshot {
                        revision,
                        session: session.clone(),
                    }));
                    self.revisions.send_replace(revision);
                }
                Ok((revision, value))
            }
            Err(err) => Err(ApiError::from(err).with_revision(before)),
        }
    }

    pub(crate) fn subscribe(&self) -> watch::Receiver<u64> {
        self.revisions.subscribe()
    }

    pub(crate) fn config(&self) -> &ServiceConfig {
        &self.config
    }
}

/// Binds `addr`, reporting an occupied port as [`ServiceError::PortBusy`].
pub async fn bind(addr: SocketAddr) -> Result<TcpListener, ServiceError> {
    TcpListener::bind(addr).await.map_err(|source| {
        if source.kind() == std::io::ErrorKind::AddrInUse {
            ServiceError::PortBusy { port: addr.port() }
        } else {
            ServiceError::Bind { addr, source }
        }
    })
}

/// Serves until the listener fails or `shutdown` resolves.
pub async fn serve(
    state: Arc<AppState>,
    listener: TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, session = state.session_id(), "serving");
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}
