//! HTTP/JSON API over an opened dataset.
//!
//! Reads share the dataset while anything that changes it takes it
//! exclusively, so the service is the manifest's single writer.
//! Selection runs happen on a blocking worker and are tracked by job id.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use railseg_core::active::SelectionResult;
use railseg_core::transfer::{label_status, CorrectionSet, LabelStatus};
use railseg_core::{ClassInfo, ClassSet, Provenance};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, RwLock};

use crate::dataset::{Dataset, Purpose};
use crate::manifest::ScanStatus;
use crate::report::EvaluationReport;
use crate::{io, ops, Error};

pub struct AppState {
    dataset: RwLock<Dataset>,
    jobs: Mutex<BTreeMap<u64, Job>>,
    next_job: AtomicU64,
}

impl AppState {
    pub fn new(dataset: Dataset) -> Arc<Self> {
        Arc::new(AppState {
            dataset: RwLock::new(dataset),
            jobs: Mutex::new(BTreeMap::new()),
            next_job: AtomicU64::new(1),
        })
    }

    pub fn dataset(&self) -> &RwLock<Dataset> {
        &self.dataset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Job {
    Running,
    Done { result: SelectionResult },
    Failed { error: crate::ErrorReport },
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::UnknownScan(_) | Error::Missing { .. } | Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::TestIsolation(_) => StatusCode::FORBIDDEN,
            Error::Transition { .. } | Error::Locked(_) => StatusCode::CONFLICT,
            Error::MissingPredictions(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Core(_) | Error::Invalid(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self.0.report())).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub scan_id: String,
    pub status: ScanStatus,
    pub t_scan: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_id: Option<String>,
    pub has_labels: bool,
    pub has_predictions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelsResponse {
    pub scan_id: String,
    pub classes: Vec<u16>,
    pub provenance: Vec<Provenance>,
    pub status: LabelStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRequest {
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobTicket {
    pub job_id: u64,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/classes", get(classes))
        .route("/scans", get(list_scans))
        .route("/scans/{id}/points", get(points))
        .route("/scans/{id}/labels", get(labels))
        .route("/scans/{id}/image", get(image))
        .route("/scans/{id}/corrections", put(corrections))
        .route("/scans/{id}/complete", post(complete))
        .route("/selection/run", post(run_selection))
        .route("/selection/latest", get(latest_selection))
        .route("/jobs/{id}", get(job))
        .route("/metrics/report", get(metrics_report))
        .with_state(state)
}

/// Serves until the process receives Ctrl-C.
pub async fn serve(dataset: Dataset, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(dataset)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn classes() -> Json<&'static [ClassInfo]> {
    Json(ClassSet::railway().classes())
}

async fn list_scans(State(st): State<Arc<AppState>>) -> Json<Vec<ScanSummary>> {
    let ds = st.dataset.read().await;
    Json(
        ds.manifest
            .scans
            .iter()
            .map(|s| ScanSummary {
                scan_id: s.scan_id.clone(),
                status: s.status,
                t_scan: s.t_scan,
                image_id: s.image_id.clone(),
                has_labels: s.labels.is_some(),
                has_predictions: s.predictions.is_some(),
            })
            .collect(),
    )
}

async fn points(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let ds = st.dataset.read().await;
    let scan = ds.manifest.scan(&id)?;
    let path = ds.path(&scan.cloud);
    // validate before streaming so clients never receive a corrupt record
    let cloud = io::load_cloud(&path, &id, scan.t_scan)?;
    let bytes = cloud.encode().map_err(|e| Error::format(&path, e))?;
    Ok(([(header::CONTENT_TYPE, "application/octet-stream")], bytes).into_response())
}

async fn labels(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<LabelsResponse>> {
    let ds = st.dataset.read().await;
    let labels = ds.read_labels(&id, Purpose::Annotation, None)?;
    Ok(Json(LabelsResponse {
        scan_id: id,
        status: label_status(&labels),
        classes: labels.labels.iter().map(|l| l.class.0).collect(),
        provenance: labels.labels.iter().map(|l| l.provenance).collect(),
    }))
}

async fn image(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let ds = st.dataset.read().await;
    let scan = ds.manifest.scan(&id)?;
    let entry = scan
        .image_id
        .as_deref()
        .and_then(|i| ds.manifest.image(i))
        .ok_or_else(|| Error::Missing {
            scan_id: id.clone(),
            what: "paired image",
        })?;
    let img = io::load_label_image(&ds.path(&entry.path), &ds.manifest.class_map)?;
    let png = crate::palette::encode_png(&img)?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn corrections(State(st): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<LabelStatus>> {
    let set: CorrectionSet =
        serde_json::from_slice(&body).map_err(|e| Error::Invalid(format!("invalid correction set: {e}")))?;
    let mut ds = st.dataset.write().await;
    Ok(Json(ops::submit_corrections(&mut ds, &id, &set)?))
}

async fn complete(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let mut ds = st.dataset.write().await;
    ops::complete_scan(&mut ds, &id)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn run_selection(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult<(StatusCode, Json<JobTicket>)> {
    let req: SelectionRequest =
        serde_json::from_slice(&body).map_err(|e| Error::Invalid(format!("invalid selection request: {e}")))?;
    if req.n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()).into());
    }
    let job_id = st.next_job.fetch_add(1, Ordering::Relaxed);
    st.jobs.lock().await.insert(job_id, Job::Running);
    let worker = Arc::clone(&st);
    tokio::spawn(async move {
        let inner = Arc::clone(&worker);
        let outcome = tokio::task::spawn_blocking(move || {
            let mut ds = inner.dataset.blocking_write();
            ops::select(&mut ds, req.n, None)
        })
        .await;
        let job = match outcome {
            Ok(Ok(result)) => Job::Done { result },
            Ok(Err(e)) => Job::Failed { error: e.report() },
            Err(e) => Job::Failed {
                error: Error::Invalid(format!("selection worker failed: {e}")).report(),
            },
        };
        worker.jobs.lock().await.insert(job_id, job);
    });
    Ok((StatusCode::ACCEPTED, Json(JobTicket { job_id })))
}

async fn job(State(st): State<Arc<AppState>>, Path(id): Path<u64>) -> Response {
    match st.jobs.lock().await.get(&id) {
        Some(job) => Json(job.clone()).into_response(),
        None => not_found(&format!("unknown job {id}")).into_response(),
    }
}

async fn latest_selection(State(st): State<Arc<AppState>>) -> ApiResult<Json<SelectionResult>> {
    let ds = st.dataset.read().await;
    ds.manifest
        .al_iterations
        .last()
        .cloned()
        .map(Json)
        .ok_or_else(|| not_found("no selection round has run yet"))
}

async fn metrics_report(State(st): State<Arc<AppState>>) -> ApiResult<Json<EvaluationReport>> {
    let ds = st.dataset.read().await;
    let rel = ds
        .manifest
        .metrics_report
        .as_ref()
        .ok_or_else(|| not_found("no evaluation report yet"))?;
    Ok(Json(io::load_json(&ds.path(rel))?))
}

fn not_found(msg: &str) -> ApiError {
    ApiError(Error::NotFound(msg.into()))
}
