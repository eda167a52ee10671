use std::io;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use serde::Deserialize;
use tokio::sync::{oneshot, Semaphore};

use super::remote::{WireProblem, WireSampleSet};
use super::{sa_sample, AnnealSchedule};

/// Settings for the local annealing service.
#[derive(Debug, Clone)]
pub struct StubConfig {
    pub schedule: AnnealSchedule,
    /// Requests beyond this many in flight get `503`.
    pub max_concurrent: usize,
    /// Artificial latency before sampling, for exercising client timeouts.
    pub response_delay: Option<Duration>,
}

impl Default for StubConfig {
    fn default() -> Self {
        Self {
            schedule: AnnealSchedule::default(),
            max_concurrent: 4,
            response_delay: None,
        }
    }
}

struct AppState {
    config: StubConfig,
    slots: Semaphore,
}

#[derive(Deserialize)]
struct SeedQuery {
    #[serde(default)]
    seed: u64,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, message.into()).into_response()
}

async fn sample(State(state): State<Arc<AppState>>, Query(q): Query<SeedQuery>, body: String) -> Response {
    let Ok(_permit) = state.slots.try_acquire() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "sampler busy");
    };
    let wire: WireProblem = match serde_json::from_str(&body) {
        Ok(w) => w,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed problem: {e}")),
    };
    let problem = match wire.to_problem() {
        Ok(p) => p,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    if let Some(d) = state.config.response_delay {
        tokio::time::sleep(d).await;
    }
    let schedule = state.config.schedule;
    let reads = wire.num_reads;
    let seed = q.seed;
    let result = tokio::task::spawn_blocking(move || sa_sample(&problem, &schedule, reads, seed)).await;
    match result {
        Ok(Ok(set)) => {
            let body = serde_json::to_string(&WireSampleSet::from(&set)).expect("sample set serializes");
            ([("content-type", "application/json")], body).into_response()
        }
        Ok(Err(e)) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

/// Router serving `POST /sample?seed=` backed by [`sa_sample`].
pub fn router(config: StubConfig) -> Router {
    let slots = Semaphore::new(config.max_concurrent);
    Router::new()
        .route("/sample", post(sample))
        .with_state(Arc::new(AppState { config, slots }))
}

/// Serves the stub on `addr` until the process exits.
pub fn serve_blocking(addr: SocketAddr, config: StubConfig) -> io::Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        log::info!("annealing stub listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(config)).await
    })
}

/// A stub running on a background thread; shut down on drop.
pub struct StubHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl StubHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for StubHandle {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Binds an ephemeral localhost port and serves the stub in the background.
pub fn spawn_stub(config: StubConfig) -> io::Result<StubHandle> {
    let std_listener = std::net::TcpListener::bind("127.0.0.1:0")?;
    std_listener.set_nonblocking(true)?;
    let addr = std_listener.local_addr()?;
    let (tx, rx) = oneshot::channel();
    let thread = std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(std_listener)?;
            axum::serve(listener, router(config))
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await
        })
    });
    Ok(StubHandle {
        addr,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}
