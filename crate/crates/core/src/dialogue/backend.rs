//! Adapter for an external model endpoint. Requests are `{prompt}` JSON and
//! replies `{text}`; the verifier expects `text` to hold
//! `{"similarity": N}`.

use std::error::Error as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prompts::PromptTemplates;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BackendKind {
    #[default]
    RuleBased,
    External,
}

/// Which backend a session uses. The credential is supplied per call and
/// never stored here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
    pub prompt_templates: PromptTemplates,
}

impl BackendDescriptor {
    pub fn rule_based() -> BackendDescriptor {
        BackendDescriptor::default()
    }

    pub fn external(endpoint: impl Into<String>, model_name: Option<String>) -> BackendDescriptor {
        BackendDescriptor {
            kind: BackendKind::External,
            endpoint: Some(endpoint.into()),
            model_name,
            prompt_templates: PromptTemplates::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "kebab-case")]
pub enum BackendError {
    #[error("backend timed out")]
    Timeout,
    #[error("backend transport failure: {0}")]
    Transport(String),
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
}

#[derive(Serialize)]
struct Request<'a> {
    prompt: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a str>,
}

#[derive(Deserialize)]
struct Reply {
    text: String,
}

#[derive(Deserialize)]
struct Judgment {
    similarity: i64,
}

fn timed_out(e: &(dyn std::error::Error + 'static)) -> bool {
    let mut cur = Some(e);
    while let Some(err) = cur {
        if let Some(io) = err.downcast_ref::<std::io::Error>() {
            if matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) {
                return true;
            }
        }
        cur = err.source();
    }
    false
}

fn classify(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::Status(code, _) => BackendError::Transport(format!("status {code}")),
        ureq::Error::Transport(t) => {
            if timed_out(&t) || t.source().is_some_and(timed_out) {
                BackendError::Timeout
            } else {
                BackendError::Transport(t.to_string())
            }
        }
    }
}

fn once(
    agent: &ureq::Agent,
    endpoint: &str,
    body: &Request<'_>,
    credential: Option<&str>,
) -> Result<String, BackendError> {
    let mut req = agent.post(endpoint);
    if let Some(key) = credential {
        req = req.set("Authorization", &format!("Bearer {key}"));
    }
    let resp = req.send_json(body).map_err(classify)?;
    let raw = resp.into_string().map_err(|e| {
        if timed_out(&e) {
            BackendError::Timeout
        } else {
            BackendError::Transport(e.to_string())
        }
    })?;
    let reply: Reply = serde_json::from_str(&raw).map_err(|e| BackendError::MalformedResponse(e.to_string()))?;
    Ok(reply.text)
}

/// One request and, after a timeout only, one retry. Returns the reply
/// text verbatim.
pub fn call_external_backend(
    descriptor: &BackendDescriptor,
    prompt: &str,
    credential: Option<&str>,
    timeout: Duration,
) -> Result<String, BackendError> {
    let endpoint = match (descriptor.kind, &descriptor.endpoint) {
        (BackendKind::External, Some(e)) => e,
        _ => return Err(BackendError::Transport("no external endpoint configured".into())),
    };
    let agent = ureq::AgentBuilder::new().timeout(timeout).build();
    let body = Request { prompt, model: descriptor.model_name.as_deref() };
    match once(&agent, endpoint, &body, credential) {
        Err(BackendError::Timeout) => once(&agent, endpoint, &body, credential),
        other => other,
    }
}

/// Reads the verifier's similarity judgment out of a reply text.
pub fn parse_similarity(text: &str) -> Result<u32, BackendError> {
    let j: Judgment = serde_json::from_str(text.trim()).map_err(|e| BackendError::MalformedResponse(e.to_string()))?;
    u32::try_from(j.similarity)
        .ok()
        .filter(|s| *s <= 100)
        .ok_or_else(|| BackendError::MalformedResponse(format!("similarity {} outside 0..=100", j.similarity)))
}
