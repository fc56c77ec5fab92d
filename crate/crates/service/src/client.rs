//! Worker-side clients.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use gbbo_core::space::{anonymize, AnonymizationCodec};
use gbbo_core::{parse_tdl, Configuration};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::api::{
    Advice, CreatedTask, EarlyStopAnswer, Health, OptimizerApi, RegisterRequest, Suggestion, TaskHistory,
    UpdateRequest,
};
use crate::error::ServiceError;
use crate::http::ErrorBody;

/// Direction of a tapped message.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wire {
    Request,
    Response,
}

/// Observer of every byte sent or received.
pub type WireTap = Arc<dyn Fn(Wire, &[u8]) + Send + Sync>;

/// Blocking JSON-over-HTTP client.
#[derive(Clone)]
pub struct HttpClient {
    base: String,
    agent: ureq::Agent,
    tap: Option<WireTap>,
}

impl std::fmt::Debug for HttpClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpClient").field("base", &self.base).finish()
    }
}

const MAX_BODY: u64 = 256 << 20;

impl HttpClient {
    /// `base` is e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(3600)))
            .build();
        Self {
            base: base.into().trim_end_matches('/').to_owned(),
            agent: config.into(),
            tap: None,
        }
    }

    pub fn with_tap(mut self, tap: WireTap) -> Self {
        self.tap = Some(tap);
        self
    }

    fn tap(&self, dir: Wire, bytes: &[u8]) {
        if let Some(t) = &self.tap {
            t(dir, bytes);
        }
    }

    fn finish<T: DeserializeOwned>(
        &self,
        result: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<T, ServiceError> {
        let mut resp = result.map_err(|e| ServiceError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let bytes = resp
            .body_mut()
            .with_config()
            .limit(MAX_BODY)
            .read_to_vec()
            .map_err(|e| ServiceError::Transport(e.to_string()))?;
        self.tap(Wire::Response, &bytes);
        if (200..300).contains(&status) {
            return serde_json::from_slice(&bytes).map_err(|e| ServiceError::Transport(e.to_string()));
        }
        Err(match serde_json::from_slice::<ErrorBody>(&bytes) {
            Ok(b) => ServiceError::from_wire(status, &b.code, &b.message),
            Err(_) => ServiceError::from_wire(status, "", &String::from_utf8_lossy(&bytes)),
        })
    }

    fn get<T: DeserializeOwned>(&self, path: &str, query: &[(&str, String)]) -> Result<T, ServiceError> {
        let url = format!("{}{}", self.base, path);
        let mut line = format!("GET {path}");
        let mut req = self.agent.get(&url);
        for (k, v) in query {
            line.push_str(&format!(" {k}={v}"));
            req = req.query(*k, v);
        }
        self.tap(Wire::Request, line.as_bytes());
        self.finish(req.call())
    }

    fn post_bytes<T: DeserializeOwned>(&self, path: &str, body: Vec<u8>) -> Result<T, ServiceError> {
        let url = format!("{}{}", self.base, path);
        let mut tapped = format!("POST {path}\n").into_bytes();
        tapped.extend_from_slice(&body);
        self.tap(Wire::Request, &tapped);
        let r = self
            .agent
            .post(&url)
            .header("content-type", "application/json")
            .send(&body[..]);
        self.finish(r)
    }

    fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, ServiceError> {
        let bytes = serde_json::to_vec(body).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        self.post_bytes(path, bytes)
    }
}

impl OptimizerApi for HttpClient {
    fn create_task(&self, tdl: &str) -> Result<String, ServiceError> {
        let r: CreatedTask = self.post_bytes("/v1/task", tdl.as_bytes().to_vec())?;
        Ok(r.task_id)
    }

    fn register(&self, task_id: &str, worker_id: &str) -> Result<(), ServiceError> {
        let req = RegisterRequest {
            worker_id: worker_id.to_owned(),
        };
        let _: serde_json::Value = self.post(&format!("/v1/task/{task_id}/register"), &req)?;
        Ok(())
    }

    fn suggest(&self, task_id: &str, worker_id: &str) -> Result<Suggestion, ServiceError> {
        self.get(
            &format!("/v1/task/{task_id}/suggest"),
            &[("worker_id", worker_id.to_owned())],
        )
    }

    fn update(&self, task_id: &str, req: &UpdateRequest) -> Result<(), ServiceError> {
        let _: serde_json::Value = self.post(&format!("/v1/task/{task_id}/update"), req)?;
        Ok(())
    }

    fn early_stop(&self, task_id: &str, trial_id: u64, best: f64) -> Result<bool, ServiceError> {
        let r: EarlyStopAnswer = self.get(
            &format!("/v1/task/{task_id}/early_stop"),
            &[("trial_id", trial_id.to_string()), ("best", best.to_string())],
        )?;
        Ok(r.stop)
    }

    fn extrapolate(&self, task_id: &str) -> Result<Advice, ServiceError> {
        self.get(&format!("/v1/task/{task_id}/extrapolate"), &[])
    }

    fn history(&self, task_id: &str) -> Result<TaskHistory, ServiceError> {
        self.get(&format!("/v1/task/{task_id}/history"), &[])
    }

    fn health(&self) -> Result<Health, ServiceError> {
        self.get("/v1/health", &[])
    }
}

/// Wraps another client so that parameter names and scales never leave
/// the worker. Task descriptions are anonymized before upload and every
/// configuration coming back is decoded locally.
pub struct AnonymizingClient<C> {
    inner: C,
    codecs: Mutex<BTreeMap<String, AnonymizationCodec>>,
}

impl<C: OptimizerApi> AnonymizingClient<C> {
    pub fn new(inner: C) -> Self {
        Self {
            inner,
            codecs: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn inner(&self) -> &C {
        &self.inner
    }

    /// Makes an existing task usable from this client. The codec depends
    /// only on the search space, so any worker holding the original
    /// description derives the same one.
    pub fn attach(&self, task_id: &str, tdl: &str) -> Result<(), ServiceError> {
        let spec = parse_tdl(tdl)?;
        let (_, codec) = anonymize(&spec.space);
        self.codecs.lock().unwrap().insert(task_id.to_owned(), codec);
        Ok(())
    }

    fn decode(&self, task_id: &str, config: &Configuration) -> Result<Configuration, ServiceError> {
        let codecs = self.codecs.lock().unwrap();
        let codec = codecs
            .get(task_id)
            .ok_or_else(|| ServiceError::BadRequest(format!("no codec for task '{task_id}'")))?;
        codec
            .inverse(config)
            .map_err(|e| ServiceError::Internal(format!("cannot decode suggestion: {e}")))
    }
}

impl<C: OptimizerApi> OptimizerApi for AnonymizingClient<C> {
    fn create_task(&self, tdl: &str) -> Result<String, ServiceError> {
        let mut spec = parse_tdl(tdl)?;
        let (space, codec) = anonymize(&spec.space);
        spec.space = space;
        let id = self.inner.create_task(&spec.to_tdl().to_string())?;
        self.codecs.lock().unwrap().insert(id.clone(), codec);
        Ok(id)
    }

    fn register(&self, task_id: &str, worker_id: &str) -> Result<(), ServiceError> {
        self.inner.register(task_id, worker_id)
    }

    fn suggest(&self, task_id: &str, worker_id: &str) -> Result<Suggestion, ServiceError> {
        let mut s = self.inner.suggest(task_id, worker_id)?;
        s.config = self.decode(task_id, &s.config)?;
        Ok(s)
    }

    fn update(&self, task_id: &str, req: &UpdateRequest) -> Result<(), ServiceError> {
        self.inner.update(task_id, req)
    }

    fn early_stop(&self, task_id: &str, trial_id: u64, best: f64) -> Result<bool, ServiceError> {
        self.inner.early_stop(task_id, trial_id, best)
    }

    fn extrapolate(&self, task_id: &str) -> Result<Advice, ServiceError> {
        self.inner.extrapolate(task_id)
    }

    fn history(&self, task_id: &str) -> Result<TaskHistory, ServiceError> {
        let mut h = self.inner.history(task_id)?;
        for line in &mut h.log {
            line.config = self.decode(task_id, &line.config)?;
        }
        Ok(h)
    }

    fn health(&self) -> Result<Health, ServiceError> {
        self.inner.health()
    }
}
