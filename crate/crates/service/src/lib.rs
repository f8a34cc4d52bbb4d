//! Session orchestration, persistence and the HTTP API.

pub mod error;
pub mod http;
pub mod replay;
pub mod service;
pub mod session;
pub mod store;
pub mod submission;
