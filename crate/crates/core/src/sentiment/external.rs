//! Client for an out-of-process sentiment model.
//!
//! The adapter speaks newline-delimited JSON on its standard streams:
//!
//! ```text
//! adapter -> {"ready":true,"model":"<name>"}                 once, at startup
//! client  -> {"id":"<string>","text":"<string>"}             one per request
//! adapter -> {"id":"<string>","label":"positive"|"negative"|"neutral","score":<0..1>}
//! ```
//!
//! Responses to a batch may arrive in any order and are paired by id. The
//! client closes the adapter's stdin to shut it down; the adapter must exit
//! within the shutdown deadline. Stderr is left to the adapter for logging.

use std::collections::HashMap;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use super::{SentimentLabel, SentimentScore};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_BATCH: usize = 64;
pub const DEFAULT_BATCH_TIMEOUT: Duration = Duration::from_secs(60);
pub const DEFAULT_SHUTDOWN_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("adapter command is empty")]
    EmptyCommand,
    #[error("failed to start adapter {command:?}: {source}")]
    Spawn { command: String, source: io::Error },
    #[error("adapter exited after {scored} scored texts: {detail}")]
    AdapterCrashed { scored: usize, detail: String },
    #[error("adapter protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("adapter did not answer within {0:?}")]
    Timeout(Duration),
    #[error("adapter did not exit within {0:?} after its input closed")]
    ShutdownTimeout(Duration),
    #[error("adapter exited with {0} on shutdown")]
    ExitStatus(ExitStatus),
    #[error("adapter handle is unusable after an earlier failure")]
    Poisoned,
}

#[derive(Debug, Clone)]
pub struct AdapterConfig {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    pub max_batch: usize,
    pub handshake_timeout: Duration,
    pub batch_timeout: Duration,
    pub shutdown_timeout: Duration,
}

impl AdapterConfig {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            command,
            max_batch: DEFAULT_MAX_BATCH,
            handshake_timeout: DEFAULT_BATCH_TIMEOUT,
            batch_timeout: DEFAULT_BATCH_TIMEOUT,
            shutdown_timeout: DEFAULT_SHUTDOWN_TIMEOUT,
        }
    }
}

#[derive(Deserialize)]
struct Handshake {
    ready: bool,
    #[serde(default)]
    model: Option<String>,
}

/// A running, handshaken adapter process. One batch in flight at a time.
pub struct AdapterHandle {
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    lines: Receiver<io::Result<String>>,
    config: AdapterConfig,
    model: String,
    scored: usize,
    poisoned: bool,
}

impl AdapterHandle {
    pub fn spawn(config: AdapterConfig) -> Result<Self, AdapterError> {
        let (program, args) = config.command.split_first().ok_or(AdapterError::EmptyCommand)?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| AdapterError::Spawn {
                command: config.command.join(" "),
                source,
            })?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = child.stdout.take().expect("piped stdout");

        // Drain stdout on a thread so reads can time out and the adapter
        // never blocks on a full pipe.
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let mut handle = Self {
            child,
            stdin: Some(stdin),
            lines,
            config,
            model: String::new(),
            scored: 0,
            poisoned: false,
        };
        let deadline = Instant::now() + handle.config.handshake_timeout;
        let line = handle.recv_line(deadline, handle.config.handshake_timeout)?;
        let hello: Handshake = serde_json::from_str(&line)
            .map_err(|e| handle.violation(format!("bad handshake {line:?}: {e}")))?;
        if !hello.ready {
            return Err(handle.violation("handshake reported ready=false".to_string()));
        }
        handle.model = hello.model.unwrap_or_default();
        Ok(handle)
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    /// Texts successfully scored over the life of this handle.
    pub fn scored(&self) -> usize {
        self.scored
    }

    pub fn max_batch(&self) -> usize {
        self.config.max_batch
    }

    /// Score at most `max_batch` texts as one protocol exchange.
    pub fn score_batch<S: Scalar>(
        &mut self,
        batch: &[(String, String)],
    ) -> Result<Vec<(String, SentimentScore<S>)>, AdapterError> {
        if self.poisoned {
            return Err(AdapterError::Poisoned);
        }
        if batch.is_empty() {
            return Ok(Vec::new());
        }
        if batch.len() > self.config.max_batch {
            return Err(self.violation(format!(
                "batch of {} exceeds max_batch {}",
                batch.len(),
                self.config.max_batch
            )));
        }

        let mut pending: HashMap<&str, usize> = HashMap::new();
        for (id, _) in batch {
            *pending.entry(id.as_str()).or_default() += 1;
        }
        self.send_requests(batch)?;

        let timeout = self.config.batch_timeout;
        let deadline = Instant::now() + timeout;
        let mut out = Vec::with_capacity(batch.len());
        while out.len() < batch.len() {
            let line = self.recv_line(deadline, timeout)?;
            let (id, score) = parse_response::<S>(&line).map_err(|e| self.violation(e))?;
            match pending.get_mut(id.as_str()) {
                Some(n) if *n > 0 => *n -= 1,
                _ => return Err(self.violation(format!("response for unexpected id {id:?}"))),
            }
            out.push((id, score));
        }
        self.scored += out.len();
        Ok(out)
    }

    fn send_requests(&mut self, batch: &[(String, String)]) -> Result<(), AdapterError> {
        let stdin = self.stdin.as_mut().ok_or(AdapterError::Poisoned)?;
        let result = batch
            .iter()
            .try_for_each(|(id, text)| {
                serde_json::to_writer(&mut *stdin, &serde_json::json!({ "id": id, "text": text }))
                    .map_err(io::Error::from)?;
                stdin.write_all(b"\n")
            })
            .and_then(|()| stdin.flush());
        result.map_err(|e| self.crashed(format!("writing requests failed: {e}")))
    }

    fn recv_line(&mut self, deadline: Instant, timeout: Duration) -> Result<String, AdapterError> {
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(remaining) {
                Ok(Ok(line)) if line.trim().is_empty() => continue,
                Ok(Ok(line)) => return Ok(line),
                Ok(Err(e)) => return Err(self.crashed(format!("reading output failed: {e}"))),
                Err(RecvTimeoutError::Timeout) => {
                    self.poison();
                    return Err(AdapterError::Timeout(timeout));
                }
                Err(RecvTimeoutError::Disconnected) => {
                    let status = self.child.wait().ok();
                    let detail = match status {
                        Some(s) => format!("output closed, process {s}"),
                        None => "output closed".to_string(),
                    };
                    return Err(self.crashed(detail));
                }
            }
        }
    }

    fn poison(&mut self) {
        self.poisoned = true;
        self.stdin = None;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    fn violation(&mut self, detail: String) -> AdapterError {
        self.poison();
        AdapterError::ProtocolViolation(detail)
    }

    fn crashed(&mut self, detail: String) -> AdapterError {
        self.poison();
        AdapterError::AdapterCrashed {
            scored: self.scored,
            detail,
        }
    }

    /// Close the adapter's input and wait for a clean exit.
    pub fn shutdown(mut self) -> Result<ExitStatus, AdapterError> {
        self.stdin = None;
        let deadline = Instant::now() + self.config.shutdown_timeout;
        loop {
            match self.child.try_wait() {
                Ok(Some(status)) if status.success() => return Ok(status),
                Ok(Some(status)) => return Err(AdapterError::ExitStatus(status)),
                Ok(None) if Instant::now() >= deadline => {
                    self.poison();
                    return Err(AdapterError::ShutdownTimeout(self.config.shutdown_timeout));
                }
                Ok(None) => thread::sleep(Duration::from_millis(5)),
                Err(e) => {
                    let detail = format!("waiting for exit failed: {e}");
                    return Err(self.crashed(detail));
                }
            }
        }
    }
}

impl Drop for AdapterHandle {
    fn drop(&mut self) {
        if self.stdin.take().is_some() {
            // Not shut down explicitly; give it the usual grace period.
            let deadline = Instant::now() + self.config.shutdown_timeout;
            while Instant::now() < deadline {
                if let Ok(Some(_)) = self.child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(5));
            }
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn parse_response<S: Scalar>(line: &str) -> Result<(String, SentimentScore<S>), String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("unparseable response {line:?}: {e}"))?;
    if let Some(err) = value.get("error") {
        return Err(format!("adapter reported error {err}"));
    }
    let id = value
        .get("id")
        .and_then(Value::as_str)
        .ok_or_else(|| format!("response without a string id: {line}"))?;
    let label_token = value
        .get("label")
        .and_then(Value::as_str)
        .ok_or_else(|| format!("response for {id:?} has no label"))?;
    let label: SentimentLabel = label_token
        .parse()
        .map_err(|bad| format!("unknown label token {bad:?} for id {id:?}"))?;
    let score = value
        .get("score")
        .and_then(Value::as_f64)
        .ok_or_else(|| format!("response for {id:?} has no numeric score"))?;
    let score = SentimentScore::new(label, S::of(score)).map_err(|e| format!("id {id:?}: {e}"))?;
    Ok((id.to_string(), score))
}

/// Score `batch` through one adapter, split into `max_batch` chunks.
pub fn score_external<S: Scalar>(
    batch: &[(String, String)],
    adapter: &mut AdapterHandle,
) -> Result<Vec<(String, SentimentScore<S>)>, AdapterError> {
    let mut out = Vec::with_capacity(batch.len());
    for chunk in batch.chunks(adapter.max_batch().max(1)) {
        out.extend(adapter.score_batch(chunk)?);
    }
    Ok(out)
}

/// Score `batch` across several adapters, each processing whole chunks in
/// turn. Pairing is by id, so the interleaving does not affect results.
pub fn score_external_parallel<S: Scalar>(
    batch: &[(String, String)],
    adapters: &mut [AdapterHandle],
) -> Result<Vec<(String, SentimentScore<S>)>, AdapterError> {
    match adapters {
        [] => Err(AdapterError::EmptyCommand),
        [single] => score_external(batch, single),
        _ => {
            let chunk = adapters.iter().map(AdapterHandle::max_batch).min().unwrap_or(1).max(1);
            let chunks: Vec<_> = batch.chunks(chunk).collect();
            let n = adapters.len();
            let results: Vec<Result<Vec<_>, AdapterError>> = thread::scope(|scope| {
                let workers: Vec<_> = adapters
                    .iter_mut()
                    .enumerate()
                    .map(|(w, adapter)| {
                        let mine: Vec<_> = chunks.iter().skip(w).step_by(n).copied().collect();
                        scope.spawn(move || {
                            let mut out = Vec::new();
                            for c in mine {
                                out.extend(adapter.score_batch::<S>(c)?);
                            }
                            Ok(out)
                        })
                    })
                    .collect();
                workers.into_iter().map(|h| h.join().expect("adapter worker panicked")).collect()
            });
            let mut out = Vec::with_capacity(batch.len());
            for r in results {
                out.extend(r?);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_parsing() {
        let (id, s) = parse_response::<f64>(r#"{"id":"7","label":"negative","score":0.9}"#).unwrap();
        assert_eq!(id, "7");
        assert_eq!(s.label, SentimentLabel::Negative);
        assert_eq!(s.confidence, 0.9);

        let err = parse_response::<f64>(r#"{"id":"7","label":"positve","score":0.9}"#).unwrap_err();
        assert!(err.contains("\"positve\""), "{err}");
        assert!(parse_response::<f64>(r#"{"id":"7","label":"positive","score":1.5}"#).is_err());
        assert!(parse_response::<f64>(r#"{"id":null,"error":"bad json"}"#).is_err());
        assert!(parse_response::<f64>(r#"{"label":"positive","score":0.5}"#).is_err());
        assert!(parse_response::<f64>("{{").is_err());
    }

    #[test]
    fn empty_command_is_rejected() {
        assert!(matches!(
            AdapterHandle::spawn(AdapterConfig::new(Vec::new())),
            Err(AdapterError::EmptyCommand)
        ));
    }
}
