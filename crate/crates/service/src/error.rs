use gbbo_core::TdlError;

/// Errors surfaced by the service, each with a fixed HTTP status.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ServiceError {
    #[error("invalid task description: {0}")]
    Tdl(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("worker '{0}' is not registered with this task")]
    NotRegistered(String),
    #[error("unknown task '{0}'")]
    UnknownTask(String),
    #[error("trial {0} is not running")]
    UnknownTrial(u64),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("task is finished")]
    Finished,
    #[error("too early: {0}")]
    TooEarly(String),
    #[error("unavailable: {0}")]
    Unavailable(String),
    #[error("storage: {0}")]
    Storage(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> u16 {
        match self {
            ServiceError::Tdl(_) | ServiceError::BadRequest(_) => 400,
            ServiceError::NotRegistered(_) => 403,
            ServiceError::UnknownTask(_) | ServiceError::UnknownTrial(_) => 404,
            ServiceError::Conflict(_) => 409,
            ServiceError::Finished => 410,
            ServiceError::TooEarly(_) => 425,
            ServiceError::Unavailable(_) => 503,
            ServiceError::Transport(_) => 502,
            ServiceError::Storage(_) | ServiceError::Internal(_) => 500,
        }
    }

    /// Stable machine-readable tag used in error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Tdl(_) => "tdl",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::NotRegistered(_) => "not_registered",
            ServiceError::UnknownTask(_) => "unknown_task",
            ServiceError::UnknownTrial(_) => "unknown_trial",
            ServiceError::Conflict(_) => "conflict",
            ServiceError::Finished => "finished",
            ServiceError::TooEarly(_) => "too_early",
            ServiceError::Unavailable(_) => "unavailable",
            ServiceError::Storage(_) => "storage",
            ServiceError::Transport(_) => "transport",
            ServiceError::Internal(_) => "internal",
        }
    }

    /// Rebuilds an error from a wire error body.
    pub fn from_wire(status: u16, code: &str, message: &str) -> Self {
        let m = message.to_owned();
        match code {
            "tdl" => ServiceError::Tdl(m),
            "bad_request" => ServiceError::BadRequest(m),
            "not_registered" => ServiceError::NotRegistered(m),
            "unknown_task" => ServiceError::UnknownTask(m),
            "unknown_trial" => ServiceError::UnknownTrial(m.parse().unwrap_or(u64::MAX)),
            "conflict" => ServiceError::Conflict(m),
            "finished" => ServiceError::Finished,
            "too_early" => ServiceError::TooEarly(m),
            "unavailable" => ServiceError::Unavailable(m),
            "storage" => ServiceError::Storage(m),
            _ if status == 503 => ServiceError::Unavailable(m),
            _ => ServiceError::Internal(format!("{status}: {m}")),
        }
    }

    /// The payload that [`ServiceError::from_wire`] expects back.
    pub fn wire_message(&self) -> String {
        match self {
            ServiceError::Tdl(m)
            | ServiceError::BadRequest(m)
            | ServiceError::NotRegistered(m)
            | ServiceError::UnknownTask(m)
            | ServiceError::Conflict(m)
            | ServiceError::TooEarly(m)
            | ServiceError::Unavailable(m)
            | ServiceError::Storage(m)
            | ServiceError::Transport(m)
            | ServiceError::Internal(m) => m.clone(),
            ServiceError::UnknownTrial(id) => id.to_string(),
            ServiceError::Finished => String::new(),
        }
    }
}

impl From<TdlError> for ServiceError {
    fn from(e: TdlError) -> Self {
        ServiceError::Tdl(e.to_string())
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Storage(e.to_string())
    }
}

impl From<serde_json::Error> for ServiceError {
    fn from(e: serde_json::Error) -> Self {
        ServiceError::Storage(e.to_string())
    }
}
