//! Chat-completions client and parser for the two-section narrative reply.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::prompt::PromptPair;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Name of the environment variable holding the bearer token.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    /// Sent as `reasoning_effort`; `null` leaves the field out.
    #[serde(default = "default_effort")]
    pub reasoning_effort: Option<String>,
}

fn default_model() -> String {
    "gpt-5-mini".to_string()
}

fn default_timeout() -> u64 {
    120
}

fn default_key_env() -> String {
    "OPENAI_API_KEY".to_string()
}

fn default_effort() -> Option<String> {
    Some("high".to_string())
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            endpoint: None,
            model: default_model(),
            timeout_secs: default_timeout(),
            api_key_env: default_key_env(),
            reasoning_effort: default_effort(),
        }
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("no endpoint configured (llm.endpoint)")]
    MissingEndpoint,
    #[error("credential variable `{0}` is not set")]
    MissingCredential(String),
    #[error("request timed out after {0} s")]
    Timeout(u64),
    #[error("network error: {0}")]
    Network(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unexpected response shape: {0}")]
    BadResponse(String),
}

impl LlmError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LlmError::MissingEndpoint | LlmError::MissingCredential(_) => 2,
            _ => 5,
        }
    }
}

/// Request body: only the two prompts, never dataset rows.
pub fn request_body(cfg: &LlmConfig, p: &PromptPair) -> serde_json::Value {
    let mut body = json!({
        "model": cfg.model,
        "messages": [
            {"role": "system", "content": p.system},
            {"role": "user", "content": p.user},
        ],
    });
    if let Some(effort) = &cfg.reasoning_effort {
        body["reasoning_effort"] = json!(effort);
    }
    body
}

/// Sends the prompt pair and parses the reply.
pub fn request_report(cfg: &LlmConfig, p: &PromptPair) -> Result<ParsedReport, LlmError> {
    let endpoint = cfg.endpoint.as_deref().ok_or(LlmError::MissingEndpoint)?;
    let key = std::env::var(&cfg.api_key_env)
        .ok()
        .filter(|k| !k.is_empty())
        .ok_or_else(|| LlmError::MissingCredential(cfg.api_key_env.clone()))?;
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
        .http_status_as_error(false)
        .build()
        .into();
    let mut resp = agent
        .post(endpoint)
        .header("Authorization", &format!("Bearer {key}"))
        .send_json(request_body(cfg, p))
        .map_err(|e| transport_error(e, cfg.timeout_secs))?;
    let status = resp.status().as_u16();
    let text = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| transport_error(e, cfg.timeout_secs))?;
    if !(200..300).contains(&status) {
        return Err(LlmError::Status { status, body: text });
    }
    let content = reply_content(&text)?;
    Ok(parse_report(&content))
}

fn transport_error(e: ureq::Error, timeout: u64) -> LlmError {
    match e {
        ureq::Error::Timeout(_) => LlmError::Timeout(timeout),
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => LlmError::Timeout(timeout),
        other => LlmError::Network(other.to_string()),
    }
}

/// `choices[0].message.content` of a chat-completions response.
pub fn reply_content(body: &str) -> Result<String, LlmError> {
    let v: serde_json::Value = serde_json::from_str(body).map_err(|e| LlmError::BadResponse(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| LlmError::BadResponse("missing choices[0].message.content".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedReport {
    pub text: Option<String>,
    pub latex: Option<String>,
    pub raw: String,
    /// Set unless the reply consists of exactly one `TEXT:` section
    /// followed by exactly one `LATEX:` section.
    pub structure_violation: bool,
}

/// Splits a reply on line-leading `TEXT:` and `LATEX:` labels.
pub fn parse_report(raw: &str) -> ParsedReport {
    let mut text_at = Vec::new();
    let mut latex_at = Vec::new();
    let mut offset = 0;
    for line in raw.split_inclusive('\n') {
        let t = line.trim_start();
        if t.starts_with("TEXT:") {
            text_at.push(offset + line.len() - t.len());
        } else if t.starts_with("LATEX:") {
            latex_at.push(offset + line.len() - t.len());
        }
        offset += line.len();
    }
    let violation = |text, latex| ParsedReport {
        text,
        latex,
        raw: raw.to_string(),
        structure_violation: true,
    };
    let (&[t], &[l]) = (&text_at[..], &latex_at[..]) else {
        return violation(None, None);
    };
    if l < t || !raw[..t].trim().is_empty() {
        return violation(None, None);
    }
    let text = raw[t + "TEXT:".len()..l].trim().to_string();
    let latex = raw[l + "LATEX:".len()..].trim().to_string();
    ParsedReport {
        text: Some(text),
        latex: Some(latex),
        raw: raw.to_string(),
        structure_violation: false,
    }
}
