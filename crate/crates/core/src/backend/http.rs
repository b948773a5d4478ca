use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::protocol::{
    AdapterResponse, ErrorResponse, HealthResponse, InpaintRequest, InpaintResponse, TrainRequest,
};
use super::{AdapterRef, Backend, BackendError, Health, InpaintJob, TrainJob};
use crate::imaging::RasterImage;

/// Backend reached over HTTP/1.1 + JSON.
pub struct HttpBackend {
    base: String,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(base_url: &str) -> Result<Self, BackendError> {
        Self::with_timeout(base_url, Duration::from_secs(600))
    }

    pub fn with_timeout(base_url: &str, timeout: Duration) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .connect_timeout(Duration::from_secs(10))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(Self {
            base: base_url.trim_end_matches('/').to_owned(),
            client,
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn send<T: DeserializeOwned>(
        &self,
        req: reqwest::blocking::RequestBuilder,
        what: &str,
        adapter_id: Option<&str>,
    ) -> Result<T, BackendError> {
        let resp = req
            .send()
            .map_err(|e| BackendError::Transport(format!("{what}: {e}")))?;
        let status = resp.status().as_u16();
        let body = resp
            .bytes()
            .map_err(|e| BackendError::Transport(format!("{what}: {e}")))?;
        if (200..300).contains(&status) {
            return serde_json::from_slice(&body)
                .map_err(|e| BackendError::InvalidResponse(format!("{what}: {e}")));
        }
        let err: Option<ErrorResponse> = serde_json::from_slice(&body).ok();
        let message = err
            .as_ref()
            .map(|e| e.error.clone())
            .unwrap_or_else(|| String::from_utf8_lossy(&body).into_owned());
        Err(match (status, adapter_id) {
            (404, Some(id)) => BackendError::UnknownAdapter(id.to_owned()),
            (500.., _) => BackendError::Server { status, message },
            _ => BackendError::Permanent {
                message: format!("{what}: {status} {message}"),
                sample_index: err.and_then(|e| e.sample_index),
            },
        })
    }

    fn post<B: Serialize, T: DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
        adapter_id: Option<&str>,
    ) -> Result<T, BackendError> {
        let json = serde_json::to_vec(body).map_err(|e| BackendError::permanent(e.to_string()))?;
        let req = self
            .client
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .body(json);
        self.send(req, path, adapter_id)
    }
}

impl Backend for HttpBackend {
    fn health(&self) -> Result<Health, BackendError> {
        let req = self.client.get(format!("{}/v1/health", self.base));
        self.send::<HealthResponse>(req, "/v1/health", None)
    }

    fn submit_train(&self, job: &TrainJob) -> Result<AdapterRef, BackendError> {
        let req = TrainRequest::from_job(job)?;
        Ok(self
            .post::<_, AdapterResponse>("/v1/train", &req, None)?
            .into())
    }

    fn adapter(&self, id: &str) -> Result<AdapterRef, BackendError> {
        let path = format!("/v1/adapters/{id}");
        let req = self.client.get(format!("{}{path}", self.base));
        Ok(self.send::<AdapterResponse>(req, &path, Some(id))?.into())
    }

    fn inpaint(&self, job: &InpaintJob) -> Result<Vec<RasterImage>, BackendError> {
        let req = InpaintRequest::from_job(job)?;
        let resp: InpaintResponse = self.post("/v1/inpaint", &req, Some(&job.adapter_id))?;
        resp.decode()
    }
}
