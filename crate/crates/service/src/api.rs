//! HTTP/JSON front end.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use slabroker_core::monitoring::TimeWindow;
use slabroker_core::sla::{parse_sla_request_xml, SlaRequestDoc};

use crate::broker::{Broker, BrokerError};
use crate::model::{ConsumerProfile, ProviderRecord};

pub struct ApiError(BrokerError);

impl From<BrokerError> for ApiError {
    fn from(e: BrokerError) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self.0 {
            BrokerError::NotFound { .. } => (StatusCode::NOT_FOUND, "not_found"),
            BrokerError::NoProviders => (StatusCode::CONFLICT, "no_providers"),
            BrokerError::ConflictingRecord(_) => (StatusCode::CONFLICT, "conflicting_record"),
            BrokerError::AttributeMismatch(_) => (StatusCode::UNPROCESSABLE_ENTITY, "attribute_mismatch"),
            BrokerError::Invalid(_) | BrokerError::Sla(_) | BrokerError::Monitor(_) => (StatusCode::BAD_REQUEST, "invalid"),
            BrokerError::SelectionFailed(_) => (StatusCode::UNPROCESSABLE_ENTITY, "selection_failed"),
            BrokerError::Negotiation(_) | BrokerError::Store(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        (status, Json(json!({ "error": kind, "message": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_json<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError(BrokerError::Invalid(format!("line {}, column {}: {e}", e.line(), e.column()))))
}

async fn blocking<T: Send + 'static>(
    broker: Arc<Broker>,
    f: impl FnOnce(&Broker) -> Result<T, BrokerError> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(move || f(&broker))
        .await
        .map_err(|e| ApiError(BrokerError::Invalid(format!("worker failed: {e}"))))?
        .map_err(ApiError)
}

#[derive(Deserialize)]
struct UpdateFlag {
    #[serde(default)]
    update: bool,
}

async fn register_provider(
    State(broker): State<Arc<Broker>>,
    Query(flag): Query<UpdateFlag>,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    let record: ProviderRecord = parse_json(&body)?;
    let id = blocking(broker, move |b| b.register_provider(record, flag.update)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "provider_id": id }))))
}

async fn list_providers(State(broker): State<Arc<Broker>>) -> impl IntoResponse {
    Json(broker.providers())
}

async fn set_profile(State(broker): State<Arc<Broker>>, Path(id): Path<String>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let profile: ConsumerProfile = parse_json(&body)?;
    let stored = blocking(broker, move |b| {
        b.set_profile(&id, profile)?;
        b.get_profile(&id)
    })
    .await?;
    Ok(Json(stored))
}

async fn get_profile(State(broker): State<Arc<Broker>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(broker.get_profile(&id)?))
}

#[derive(Deserialize)]
struct ConsumerQuery {
    consumer: Option<String>,
}

fn is_xml(headers: &HeaderMap) -> bool {
    headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|ct| ct.split(';').next().unwrap_or("").trim().ends_with("xml"))
}

async fn submit_request(
    State(broker): State<Arc<Broker>>,
    Query(q): Query<ConsumerQuery>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    let doc: SlaRequestDoc = if is_xml(&headers) {
        parse_sla_request_xml(&body).map_err(BrokerError::from)?
    } else {
        parse_json(&body)?
    };
    let session = blocking(broker, move |b| b.submit_request(q.consumer.as_deref(), doc)).await?;
    Ok((StatusCode::CREATED, Json(session)))
}

async fn get_session(State(broker): State<Arc<Broker>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(broker.get_session(&id)?))
}

async fn get_sla(State(broker): State<Arc<Broker>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(broker.get_sla(&id)?))
}

async fn post_metrics(State(broker): State<Arc<Broker>>, Path(id): Path<String>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let report = blocking(broker, move |b| b.post_metrics(&id, &body)).await?;
    Ok(Json(report))
}

#[derive(Deserialize)]
struct WindowQuery {
    start: i64,
    end: i64,
}

async fn get_compliance(
    State(broker): State<Arc<Broker>>,
    Path(id): Path<String>,
    Query(w): Query<WindowQuery>,
) -> ApiResult<impl IntoResponse> {
    let window = TimeWindow::new(w.start, w.end).map_err(BrokerError::from)?;
    Ok(Json(broker.get_compliance(&id, window)?))
}

async fn health() -> impl IntoResponse {
    Json(json!({ "status": "ok" }))
}

pub fn router(broker: Arc<Broker>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/providers", post(register_provider).get(list_providers))
        .route("/consumers/{id}/profile", post(set_profile).get(get_profile))
        .route("/requests", post(submit_request))
        .route("/sessions/{id}", get(get_session))
        .route("/slas/{id}", get(get_sla))
        .route("/slas/{id}/metrics", post(post_metrics))
        .route("/slas/{id}/compliance", get(get_compliance))
        .with_state(broker)
}

/// Serves the API on `listener` until ctrl-c.
pub async fn serve(broker: Arc<Broker>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(broker))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
