//! Policy backed by an OpenAI-compatible chat-completion endpoint.
//!
//! Every query is a single user message laid out as context, task and
//! constraints, and every reply must be a bare JSON value. Replies that do
//! not parse are sent back with the parse error for another attempt.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tracing::{debug, warn};

use crate::astg::{EventDescriptor, Feedback};
use crate::audio::StreamUsage;

use super::{
    AppMeta, ExplorationPolicy, NextEventQuery, NumberedElement, PolicyError, VerifyQuery,
    WindowView,
};

fn default_timeout() -> u64 {
    30
}

fn default_retries() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChatEndpointConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    /// Append every request body to this file as JSON lines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_log: Option<PathBuf>,
}

impl ChatEndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, api_key_env: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: api_key_env.into(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            request_log: None,
        }
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
struct Message {
    role: String,
    content: String,
}

impl Message {
    fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }

    fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct EventReply {
    event_type: String,
    id: usize,
    #[serde(default)]
    text: Option<String>,
}

pub struct LlmPolicy {
    cfg: ChatEndpointConfig,
    key: String,
    client: reqwest::blocking::Client,
}

impl std::fmt::Debug for LlmPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmPolicy").field("cfg", &self.cfg).finish_non_exhaustive()
    }
}

impl LlmPolicy {
    pub fn new(cfg: ChatEndpointConfig) -> Result<Self, PolicyError> {
        if cfg.timeout_secs == 0 {
            return Err(PolicyError::EndpointUnavailable("timeout must be positive".into()));
        }
        let key = std::env::var(&cfg.api_key_env)
            .map_err(|_| PolicyError::MissingCredential(cfg.api_key_env.clone()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| PolicyError::EndpointUnavailable(e.to_string()))?;
        Ok(Self { cfg, key, client })
    }

    fn send(&self, messages: &[Message]) -> Result<String, PolicyError> {
        let body = json!({
            "model": self.cfg.model,
            "temperature": 0,
            "messages": messages,
        });
        if let Some(path) = &self.cfg.request_log {
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| PolicyError::EndpointUnavailable(format!("request log: {e}")))?;
            writeln!(f, "{body}")
                .map_err(|e| PolicyError::EndpointUnavailable(format!("request log: {e}")))?;
        }
        let resp = self
            .client
            .post(self.cfg.endpoint())
            .bearer_auth(&self.key)
            .json(&body)
            .send()
            .map_err(|e| PolicyError::EndpointUnavailable(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(PolicyError::EndpointUnavailable(format!("HTTP {status}")));
        }
        let parsed: ChatResponse = resp
            .json()
            .map_err(|e| PolicyError::EndpointUnavailable(format!("bad response body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| PolicyError::EndpointUnavailable("response has no choices".into()))
    }

    /// Ask once, then re-ask up to `max_retries` times with the parse error.
    fn ask<T>(
        &self,
        prompt: String,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, PolicyError> {
        let mut messages = vec![Message::user(prompt)];
        let attempts = self.cfg.max_retries + 1;
        for attempt in 1..=attempts {
            let reply = self.send(&messages)?;
            debug!(attempt, reply = %reply, "policy reply");
            match parse(strip_fences(&reply)) {
                Ok(v) => return Ok(v),
                Err(reason) if attempt < attempts => {
                    warn!(attempt, %reason, "unusable policy reply, asking again");
                    messages.push(Message::assistant(reply));
                    messages.push(Message::user(format!(
                        "Your previous reply could not be used: {reason}\nReply again with JSON only."
                    )));
                }
                Err(reason) => return Err(PolicyError::MalformedReply { attempts, reason }),
            }
        }
        unreachable!("the loop returns on its last attempt")
    }
}

fn strip_fences(reply: &str) -> &str {
    let t = reply.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let rest = rest.strip_suffix("```").unwrap_or(rest);
    match rest.find('\n') {
        Some(i) => rest[i + 1..].trim(),
        None => rest.trim(),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("not the expected JSON: {e}"))
}

fn element_list(elements: &[NumberedElement]) -> String {
    elements
        .iter()
        .map(|e| format!("{}. {}", e.index, e.description))
        .collect::<Vec<_>>()
        .join("\n")
}

fn feedback_text(fb: Option<&Feedback>) -> String {
    match fb {
        None => "none yet".into(),
        Some(f) => serde_json::to_string(f).expect("feedback serializes"),
    }
}

pub(crate) fn app_prompt(app: &AppMeta) -> String {
    format!(
        "Context: app `{}` in the {} category. Its interface elements:\n{}\n\n\
         Task: list the audio stream types this app can play.\n\n\
         Constraints: use only MUSIC, MOVIE, NAVIG and COMMU; reply with a JSON array of strings only.",
        app.id,
        app.category,
        app.element_descriptions.join("\n"),
    )
}

pub(crate) fn window_prompt(w: &WindowView) -> String {
    let listing = w
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| format!("{}. {}", i + 1, e.metadata))
        .collect::<Vec<_>>()
        .join("\n");
    format!(
        "Context: window `{}` of app `{}` with {} clickable elements, numbered:\n{}\n\n\
         Task: describe what each element does, in order.\n\n\
         Constraints: one short functional description per element; reply with a JSON array of exactly {} strings only.",
        w.window,
        w.app,
        w.elements.len(),
        listing,
        w.elements.len(),
    )
}

pub(crate) fn next_event_prompt(q: &NextEventQuery<'_>) -> String {
    format!(
        "Context: exploring app `{}` with the goal of making it play a {} audio stream.\n\
         Current window: {}\n\
         Elements:\n{}\n\
         Graph so far:\n{}\
         Previous feedback: {}\n\n\
         Task: choose the next event that moves the app towards playing {}.\n\n\
         Constraints: prefer elements whose function serves the goal; do not repeat events that \
         already failed; reply with JSON only, shaped as {{\"event_type\": \"click\", \"id\": <number>}} \
         or {{\"event_type\": \"input\", \"id\": <number>, \"text\": \"...\"}}.",
        q.app,
        q.usage,
        q.window,
        element_list(q.elements),
        q.graph.summary(),
        feedback_text(q.feedback),
        q.usage,
    )
}

pub(crate) fn verify_prompt(q: &VerifyQuery<'_>) -> String {
    let usage_after = q.usage_after.map_or("none".to_string(), |u| u.to_string());
    format!(
        "Context: app `{}` is being explored to play a {} audio stream.\n\
         Event executed: {}\n\
         Window before: {}\nElements before:\n{}\n\
         Window after: {}\nElements after:\n{}\n\
         Audio status after: {}, stream type after: {}\n\n\
         Task: judge whether the event made progress towards the goal and whether exploration of this stream type is done.\n\n\
         Constraints: the stream type must match {}; reply with JSON only, shaped as \
         {{\"validity\": true, \"terminated\": false, \"suggestion\": \"...\"}}.",
        q.app,
        q.usage,
        q.event,
        q.window_before,
        element_list(q.elements_before),
        q.window_after,
        element_list(q.elements_after),
        q.status_after,
        usage_after,
        q.usage,
    )
}

pub(crate) fn parse_event(text: &str, elements: &[NumberedElement]) -> Result<EventDescriptor, String> {
    let r: EventReply = parse_json(text)?;
    let element = elements
        .iter()
        .find(|e| e.index == r.id)
        .ok_or_else(|| format!("there is no element numbered {}", r.id))?
        .id
        .clone();
    match (r.event_type.as_str(), r.text) {
        ("click", _) => Ok(EventDescriptor::Click { element }),
        ("input", Some(text)) => Ok(EventDescriptor::Input { element, text }),
        ("input", None) => Err("an input event needs a \"text\" field".into()),
        (other, _) => Err(format!("unknown event_type {other:?}")),
    }
}

impl ExplorationPolicy for LlmPolicy {
    fn understand_app(&mut self, app: &AppMeta) -> Result<Vec<StreamUsage>, PolicyError> {
        self.ask(app_prompt(app), |text| {
            let names: Vec<String> = parse_json(text)?;
            let mut out = Vec::new();
            for n in names {
                let u = StreamUsage::parse(&n).ok_or_else(|| format!("unknown stream type {n:?}"))?;
                if !out.contains(&u) {
                    out.push(u);
                }
            }
            Ok(out)
        })
    }

    fn understand_win(&mut self, window: &WindowView) -> Result<Vec<String>, PolicyError> {
        let n = window.elements.len();
        self.ask(window_prompt(window), |text| {
            let v: Vec<String> = parse_json(text)?;
            if v.len() != n {
                return Err(format!("expected {n} descriptions, got {}", v.len()));
            }
            Ok(v)
        })
    }

    fn next_event(&mut self, q: &NextEventQuery<'_>) -> Result<EventDescriptor, PolicyError> {
        self.ask(next_event_prompt(q), |text| parse_event(text, q.elements))
    }

    fn verify(&mut self, q: &VerifyQuery<'_>) -> Result<Feedback, PolicyError> {
        self.ask(verify_prompt(q), |text| {
            let v: Value = parse_json(text)?;
            let field = |k: &str| {
                v.get(k)
                    .and_then(Value::as_bool)
                    .ok_or_else(|| format!("missing boolean field {k:?}"))
            };
            Ok(Feedback {
                validity: field("validity")?,
                terminated: field("terminated")?,
                suggestion: v
                    .get("suggestion")
                    .and_then(Value::as_str)
                    .unwrap_or_default()
                    .to_string(),
            })
        })
    }
}
