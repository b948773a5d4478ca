//! HTTP front end for any [`Backend`], used to serve the mock over the wire.

use std::net::SocketAddr;
use std::sync::Arc;

use ais_core::backend::protocol::{error_reply, serve, InpaintRequest, TrainRequest};
use ais_core::backend::{Backend, BackendError};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::Value;

type Shared = Arc<dyn Backend>;
type Reply = (StatusCode, Json<Value>);

fn reply<T: Serialize>(r: Result<T, BackendError>) -> Reply {
    match r {
        Ok(v) => (
            StatusCode::OK,
            Json(serde_json::to_value(v).unwrap_or(Value::Null)),
        ),
        Err(e) => {
            let (status, body) = error_reply(&e);
            (
                StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
                Json(serde_json::to_value(body).unwrap_or(Value::Null)),
            )
        }
    }
}

async fn blocking<T, F>(f: F) -> Reply
where
    T: Serialize + Send + 'static,
    F: FnOnce() -> Result<T, BackendError> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => reply(r),
        Err(e) => reply::<()>(Err(BackendError::Server {
            status: 500,
            message: e.to_string(),
        })),
    }
}

async fn health(State(b): State<Shared>) -> Reply {
    blocking(move || serve::health(b.as_ref())).await
}

async fn train(State(b): State<Shared>, Json(req): Json<TrainRequest>) -> Reply {
    blocking(move || serve::train(b.as_ref(), req)).await
}

async fn adapter(State(b): State<Shared>, Path(id): Path<String>) -> Reply {
    blocking(move || serve::adapter(b.as_ref(), &id)).await
}

async fn inpaint(State(b): State<Shared>, Json(req): Json<InpaintRequest>) -> Reply {
    blocking(move || serve::inpaint(b.as_ref(), req)).await
}

pub fn router(backend: Shared) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/train", post(train))
        .route("/v1/adapters/{id}", get(adapter))
        .route("/v1/inpaint", post(inpaint))
        .layer(axum::extract::DefaultBodyLimit::max(256 << 20))
        .with_state(backend)
}

/// Binds `addr` and serves until the process exits. `on_bound` receives
/// the actual address (useful with port 0).
pub fn run(
    addr: SocketAddr,
    backend: Shared,
    on_bound: impl FnOnce(SocketAddr),
) -> std::io::Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        on_bound(listener.local_addr()?);
        axum::serve(listener, router(backend)).await
    })
}

/// Serves on a background thread; returns the bound address.
pub fn spawn(addr: SocketAddr, backend: Shared) -> std::io::Result<SocketAddr> {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let tx2 = tx.clone();
        if let Err(e) = run(addr, backend, move |a| {
            let _ = tx2.send(Ok(a));
        }) {
            let _ = tx.send(Err(e));
        }
    });
    rx.recv()
        .map_err(|e| std::io::Error::other(e.to_string()))?
}
