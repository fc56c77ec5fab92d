//! Suggestion service for black-box optimization tasks.
//!
//! Workers talk to the service through [`OptimizerApi`], implemented both
//! by the in-process [`Service`] and by the HTTP [`client::HttpClient`].
//! Every task lives in an append-only log inside the task database; the
//! master places tasks on suggestion servers and moves them when a server
//! stops sending heartbeats.

pub mod api;
pub mod client;
pub mod clock;
pub mod error;
pub mod http;
pub mod master;
pub mod service;
pub mod storage;
pub mod task;

pub use api::{Advice, Objectives, OptimizerApi, Suggestion, TaskHistory, UpdateRequest};
pub use clock::{Clock, ManualClock, SystemClock};
pub use error::ServiceError;
pub use service::{Service, ServiceConfig};
