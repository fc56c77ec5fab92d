//! REST binding of [`OptimizerApi`] for a [`Service`].

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::api::{CreatedTask, EarlyStopAnswer, OptimizerApi, RegisterRequest, UpdateRequest};
use crate::error::ServiceError;
use crate::service::Service;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub error: String,
}

pub struct ApiError(pub ServiceError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = ErrorBody {
            code: self.0.code().to_owned(),
            message: self.0.wire_message(),
            error: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

type Shared = Arc<Service>;
type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs a blocking service call off the async executor.
async fn blocking<T, F>(svc: Shared, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> Result<T, ServiceError> + Send + 'static,
{
    match tokio::task::spawn_blocking(move || f(&svc)).await {
        Ok(r) => r.map(Json).map_err(ApiError),
        Err(e) => Err(ApiError(ServiceError::Internal(e.to_string()))),
    }
}

#[derive(Deserialize)]
struct SuggestQuery {
    worker_id: String,
}

#[derive(Deserialize)]
struct EarlyStopQuery {
    trial_id: u64,
    best: f64,
}

#[derive(Deserialize)]
struct ExtrapolateQuery {
    budget: Option<f64>,
}

async fn create_task(State(svc): State<Shared>, body: String) -> ApiResult<CreatedTask> {
    blocking(svc, move |s| s.create_task(&body).map(|task_id| CreatedTask { task_id })).await
}

async fn register(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<RegisterRequest>,
) -> ApiResult<serde_json::Value> {
    blocking(svc, move |s| {
        s.register(&id, &req.worker_id)?;
        Ok(serde_json::json!({"ok": true}))
    })
    .await
}

async fn suggest(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<SuggestQuery>,
) -> impl IntoResponse {
    blocking(svc, move |s| s.suggest(&id, &q.worker_id)).await
}

async fn update(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<UpdateRequest>,
) -> ApiResult<serde_json::Value> {
    blocking(svc, move |s| {
        s.update(&id, &req)?;
        Ok(serde_json::json!({"ok": true}))
    })
    .await
}

async fn early_stop(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<EarlyStopQuery>,
) -> ApiResult<EarlyStopAnswer> {
    blocking(svc, move |s| s.early_stop(&id, q.trial_id, q.best).map(|stop| EarlyStopAnswer { stop })).await
}

async fn extrapolate(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<ExtrapolateQuery>,
) -> impl IntoResponse {
    blocking(svc, move |s| s.extrapolate_with_budget(&id, q.budget)).await
}

async fn history(State(svc): State<Shared>, Path(id): Path<String>) -> impl IntoResponse {
    blocking(svc, move |s| s.history(&id)).await
}

async fn health(State(svc): State<Shared>) -> impl IntoResponse {
    blocking(svc, |s| s.health()).await
}

pub fn router(svc: Shared) -> Router {
    Router::new()
        .route("/v1/task", post(create_task))
        .route("/v1/task/{id}/register", post(register))
        .route("/v1/task/{id}/suggest", get(suggest))
        .route("/v1/task/{id}/update", post(update))
        .route("/v1/task/{id}/early_stop", get(early_stop))
        .route("/v1/task/{id}/extrapolate", get(extrapolate))
        .route("/v1/task/{id}/history", get(history))
        .route("/v1/health", get(health))
        .with_state(svc)
}

/// Serves `svc` on an already bound listener until `shutdown` resolves.
pub async fn serve(
    svc: Shared,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(svc)).with_graceful_shutdown(shutdown).await
}

/// An HTTP front end running on its own thread; stopped on drop.
pub struct BackgroundServer {
    addr: SocketAddr,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl BackgroundServer {
    /// Binds `addr` (use port 0 for an ephemeral port) and starts serving.
    pub fn start(svc: Shared, addr: &str) -> std::io::Result<Self> {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(1)
            .enable_all()
            .build()?;
        let listener = rt.block_on(tokio::net::TcpListener::bind(addr))?;
        let local = listener.local_addr()?;
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let shutdown = async {
                let _ = rx.await;
            };
            if let Err(e) = rt.block_on(serve(svc, listener, shutdown)) {
                tracing::error!(error = %e, "http server stopped");
            }
        });
        Ok(Self {
            addr: local,
            stop: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
