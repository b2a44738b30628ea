//! Translator and corrector backends: an HTTP shim client, a local command,
//! and cassette replay. All three return the completion text byte-exact.

mod cassette;

pub use cassette::{request_digest, Cassette, CassetteEntry};

use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::process::{self, Exit, ProcessSpec};
use crate::prompt::RenderedPrompt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Command,
    Replay,
}

fn default_timeout() -> f64 {
    120.0
}
fn default_template() -> String {
    "chat".into()
}
fn default_max_tokens() -> u32 {
    2048
}
fn default_backoff_ms() -> u64 {
    1000
}

/// One model version behind one interface. Put the version and sampling
/// settings in `name` so results never mix them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSpec {
    pub name: String,
    pub kind: BackendKind,
    /// URL for `http`, shell command for `command`; unused for `replay`.
    #[serde(default)]
    pub endpoint_or_cmd: String,
    /// Seconds per request.
    #[serde(default = "default_timeout")]
    pub timeout: f64,
    #[serde(default)]
    pub max_retries: u32,
    /// Requests per minute.
    #[serde(default)]
    pub rate_limit: Option<f64>,
    #[serde(default = "default_template")]
    pub template: String,
    #[serde(default)]
    pub cassette: Option<PathBuf>,
    /// Name of the environment variable holding a bearer token.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// First retry delay; doubles per attempt up to 30 s, with ±20% jitter.
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
}

impl BackendSpec {
    pub fn new(name: &str, kind: BackendKind, endpoint_or_cmd: &str) -> Self {
        BackendSpec {
            name: name.into(),
            kind,
            endpoint_or_cmd: endpoint_or_cmd.into(),
            timeout: default_timeout(),
            max_retries: 0,
            rate_limit: None,
            template: default_template(),
            cassette: None,
            api_key_env: None,
            max_tokens: default_max_tokens(),
            backoff_base_ms: default_backoff_ms(),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let bad = |m: &str| Err(BackendError::InvalidSpec(format!("backend `{}`: {m}", self.name)));
        if self.name.trim().is_empty() {
            return bad("empty name");
        }
        if !(self.timeout.is_finite() && self.timeout > 0.0) {
            return bad("timeout must be positive");
        }
        if let Some(r) = self.rate_limit {
            if !(r.is_finite() && r > 0.0) {
                return bad("rate_limit must be positive");
            }
        }
        match self.kind {
            BackendKind::Replay if self.cassette.is_none() => bad("replay backends need a cassette path"),
            BackendKind::Http | BackendKind::Command if self.endpoint_or_cmd.trim().is_empty() => {
                bad("missing endpoint_or_cmd")
            }
            _ => Ok(()),
        }
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub raw_text: String,
    pub backend_name: String,
    pub latency_ms: u64,
    pub attempt: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("transport error after {attempts} attempt(s): {message}")]
    TransportError { attempts: u32, message: String },
    #[error("command exited with {code:?}: {stderr}")]
    NonZeroExit { code: Option<i32>, stderr: String },
    #[error("no recorded completion for digest {digest}")]
    CassetteMiss { digest: String },
    #[error("cannot read cassette {}: {message}", .path.display())]
    CassetteRead { path: PathBuf, message: String },
    #[error("cannot write cassette {}: {message}", .path.display())]
    CassetteWrite { path: PathBuf, message: String },
    #[error("invalid backend spec: {0}")]
    InvalidSpec(String),
    #[error("cannot record through replay backend `{0}`")]
    RecordOnReplay(String),
    #[error("environment variable {0} (API key) is not set")]
    MissingApiKey(String),
}

const BACKOFF_CAP: Duration = Duration::from_secs(30);

/// Delay before retry number `attempt` (0 = first retry).
pub fn backoff_delay(base: Duration, attempt: u32, rng: &mut impl Rng) -> Duration {
    let raw = base.as_secs_f64() * 2f64.powi(attempt.min(30) as i32);
    let jitter = rng.random_range(0.8..=1.2);
    Duration::from_secs_f64((raw * jitter).min(BACKOFF_CAP.as_secs_f64()))
}

/// Minimum spacing between request starts, shared by all callers of one
/// backend: a token bucket holding a single token.
#[derive(Debug)]
struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    fn per_minute(rpm: f64) -> Self {
        RateLimiter {
            interval: Duration::from_secs_f64(60.0 / rpm),
            next: Mutex::new(None),
        }
    }

    fn acquire(&self) {
        let wait_until = {
            let mut next = self.next.lock().unwrap();
            let now = Instant::now();
            let at = next.map_or(now, |n| n.max(now));
            *next = Some(at + self.interval);
            at
        };
        let now = Instant::now();
        if wait_until > now {
            thread::sleep(wait_until - now);
        }
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    prompt: &'a str,
    max_tokens: u32,
    stop: Option<Vec<&'a str>>,
}

#[derive(Deserialize)]
struct WireResponse {
    text: String,
}

#[derive(Debug)]
pub struct Backend {
    spec: BackendSpec,
    limiter: Option<RateLimiter>,
    cassette: Option<Arc<Cassette>>,
}

impl Backend {
    pub fn new(spec: BackendSpec) -> Result<Self, BackendError> {
        spec.validate()?;
        let cassette = match (spec.kind, &spec.cassette) {
            (BackendKind::Replay, Some(p)) => Some(Arc::new(Cassette::open(p)?)),
            _ => None,
        };
        Ok(Backend {
            limiter: spec.rate_limit.map(RateLimiter::per_minute),
            spec,
            cassette,
        })
    }

    /// A replay backend answering as `name` from an already loaded cassette.
    pub fn replaying(name: &str, cassette: Arc<Cassette>) -> Self {
        let mut spec = BackendSpec::new(name, BackendKind::Replay, "");
        spec.cassette = Some(cassette.path().to_path_buf());
        Backend {
            spec,
            limiter: None,
            cassette: Some(cassette),
        }
    }

    pub fn spec(&self) -> &BackendSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn complete(&self, prompt: &RenderedPrompt) -> Result<Completion, BackendError> {
        let start = Instant::now();
        let (raw_text, attempt) = match self.spec.kind {
            BackendKind::Replay => {
                let digest = request_digest(&self.spec.name, &prompt.text);
                let cassette = self.cassette.as_ref().expect("replay backend has a cassette");
                let entry = cassette.get(&digest).ok_or(BackendError::CassetteMiss { digest })?;
                (entry.text, 0)
            }
            BackendKind::Command => (self.run_command(prompt)?, 0),
            BackendKind::Http => self.post(prompt)?,
        };
        Ok(Completion {
            raw_text,
            backend_name: self.spec.name.clone(),
            latency_ms: start.elapsed().as_millis() as u64,
            attempt,
        })
    }

    /// Completes live and stores the answer in `cassette`.
    pub fn record(&self, prompt: &RenderedPrompt, cassette: &Cassette) -> Result<Completion, BackendError> {
        if self.spec.kind == BackendKind::Replay {
            return Err(BackendError::RecordOnReplay(self.spec.name.clone()));
        }
        let c = self.complete(prompt)?;
        cassette.insert(CassetteEntry {
            digest: request_digest(&self.spec.name, &prompt.text),
            backend: self.spec.name.clone(),
            text: c.raw_text.clone(),
        })?;
        Ok(c)
    }

    fn run_command(&self, prompt: &RenderedPrompt) -> Result<String, BackendError> {
        if let Some(l) = &self.limiter {
            l.acquire();
        }
        let mut ps = ProcessSpec::new(
            vec!["sh".into(), "-c".into(), self.spec.endpoint_or_cmd.clone()],
            self.spec.timeout(),
        );
        ps.stdin = prompt.text.as_bytes().to_vec();
        let out = process::run(&ps).map_err(|e| BackendError::TransportError {
            attempts: 1,
            message: format!("cannot spawn command: {e}"),
        })?;
        match out.exit {
            Exit::TimedOut => Err(BackendError::Timeout { attempts: 1 }),
            Exit::Code(0) => String::from_utf8(out.stdout).map_err(|_| BackendError::TransportError {
                attempts: 1,
                message: "command output is not UTF-8".into(),
            }),
            Exit::Code(c) => Err(BackendError::NonZeroExit {
                code: Some(c),
                stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
            }),
            Exit::Signal(_) => Err(BackendError::NonZeroExit {
                code: None,
                stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
            }),
        }
    }

    fn post(&self, prompt: &RenderedPrompt) -> Result<(String, u32), BackendError> {
        let key = match &self.spec.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| BackendError::MissingApiKey(var.clone()))?),
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.spec.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        let body = WireRequest {
            prompt: &prompt.text,
            max_tokens: self.spec.max_tokens,
            stop: prompt.sentinel.as_deref().map(|s| vec![s]),
        };
        let base = Duration::from_millis(self.spec.backoff_base_ms);
        let mut rng = rand::rng();
        let mut last: BackendError = BackendError::TransportError {
            attempts: 0,
            message: "no attempt made".into(),
        };
        for attempt in 0..=self.spec.max_retries {
            if attempt > 0 {
                thread::sleep(backoff_delay(base, attempt - 1, &mut rng));
            }
            if let Some(l) = &self.limiter {
                l.acquire();
            }
            let mut req = agent.post(&self.spec.endpoint_or_cmd);
            if let Some(k) = &key {
                req = req.header("Authorization", format!("Bearer {k}"));
            }
            let attempts = attempt + 1;
            match req.send_json(&body) {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    let text = resp.body_mut().with_config().limit(256 * 1024 * 1024).read_to_string();
                    if status == 200 {
                        let text = text.map_err(|e| BackendError::TransportError {
                            attempts,
                            message: e.to_string(),
                        })?;
                        let wire: WireResponse = serde_json::from_str(&text).map_err(|e| BackendError::TransportError {
                            attempts,
                            message: format!("malformed response body: {e}"),
                        })?;
                        return Ok((wire.text, attempt));
                    }
                    last = BackendError::TransportError {
                        attempts,
                        message: format!("HTTP status {status}"),
                    };
                    if status < 500 {
                        return Err(last);
                    }
                }
                Err(ureq::Error::Timeout(_)) => last = BackendError::Timeout { attempts },
                Err(e) => {
                    last = BackendError::TransportError {
                        attempts,
                        message: e.to_string(),
                    }
                }
            }
            tracing::debug!(backend = %self.spec.name, attempt, "retryable failure: {last}");
        }
        Err(last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::TemplateFamily;
    use rand::SeedableRng;

    fn prompt(text: &str) -> RenderedPrompt {
        RenderedPrompt {
            text: text.into(),
            template_family: TemplateFamily::ChatStyle,
            sentinel: None,
        }
    }

    #[test]
    fn backoff_schedule() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let base = Duration::from_secs(1);
        for attempt in 0..8u32 {
            let d = backoff_delay(base, attempt, &mut rng).as_secs_f64();
            let nominal = 2f64.powi(attempt as i32);
            assert!(d >= (nominal * 0.8).min(30.0) - 1e-9 && d <= (nominal * 1.2).min(30.0) + 1e-9, "{attempt}: {d}");
        }
        assert!(backoff_delay(base, 40, &mut rng) <= BACKOFF_CAP);
    }

    #[test]
    fn command_identity() {
        let b = Backend::new(BackendSpec::new("cat", BackendKind::Command, "cat")).unwrap();
        let p = prompt("line one\n  two\u{e9}\n");
        let c = b.complete(&p).unwrap();
        assert_eq!(c.raw_text, p.text);
        assert_eq!(c.attempt, 0);
    }

    #[test]
    fn command_failures() {
        let b = Backend::new(BackendSpec::new("f", BackendKind::Command, "echo boom >&2; exit 4")).unwrap();
        assert_eq!(
            b.complete(&prompt("x")),
            Err(BackendError::NonZeroExit { code: Some(4), stderr: "boom\n".into() })
        );
        let mut spec = BackendSpec::new("slow", BackendKind::Command, "sleep 10");
        spec.timeout = 0.2;
        let b = Backend::new(spec).unwrap();
        assert_eq!(b.complete(&prompt("x")), Err(BackendError::Timeout { attempts: 1 }));
    }

    #[test]
    fn spec_validation() {
        assert!(BackendSpec::new("r", BackendKind::Replay, "").validate().is_err());
        let mut s = BackendSpec::new("c", BackendKind::Command, "cat");
        s.timeout = 0.0;
        assert!(s.validate().is_err());
        assert!(BackendSpec::new("h", BackendKind::Http, " ").validate().is_err());
    }

    #[test]
    fn record_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tape.jsonl");
        let cassette = Cassette::open(&path).unwrap();
        let live = Backend::new(BackendSpec::new("m", BackendKind::Command, "tr a-z A-Z")).unwrap();
        let recorded = live.record(&prompt("abc"), &cassette).unwrap();
        let mut spec = BackendSpec::new("m", BackendKind::Replay, "");
        spec.cassette = Some(path);
        let replay = Backend::new(spec).unwrap();
        let again = replay.complete(&prompt("abc")).unwrap();
        assert_eq!(again.raw_text, recorded.raw_text);
        assert_eq!(again.attempt, 0);
        assert!(matches!(replay.complete(&prompt("zzz")), Err(BackendError::CassetteMiss { .. })));
        assert_eq!(replay.record(&prompt("abc"), &cassette), Err(BackendError::RecordOnReplay("m".into())));
    }

    #[test]
    fn rate_limiter_spaces_requests() {
        let l = RateLimiter::per_minute(600.0);
        let start = Instant::now();
        for _ in 0..4 {
            l.acquire();
        }
        assert!(start.elapsed() >= Duration::from_millis(300));
    }
}
