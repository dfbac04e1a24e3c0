//! Client for external evaluator processes.
//!
//! Workers are launched with `sh -c <command>` and speak one JSON document
//! per line over their standard streams:
//!
//! ```text
//! engine -> worker   {"id": 7, "params": [1242, 1790, 2, 2, 1, 1, 1, 1, 1], "early_stop_c": 5}
//! worker -> engine   {"id": 7, "accuracy": 0.8672}
//!                    {"id": 7, "error": "out of memory"}
//! ```
//!
//! Ids are strictly increasing per connection. A worker may answer pending
//! requests in any order. The early-stopping patience `c` is forwarded as is;
//! applying it is the worker's job, as is the choice between training and
//! held-out accuracy.
//!
//! Any crash, timeout, malformed line, or accuracy outside `[0, 1]` fails the
//! batch with the raw exchange attached and poisons the evaluator; the
//! worker processes are killed.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::evaluation::{EvalError, Evaluator, Score};
use crate::param_space::{DecodedParams, ParamSpace};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub params: Vec<i64>,
    pub early_stop_c: u32,
}

/// A reply line: exactly one of `accuracy` and `error` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Response {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    Accuracy { id: u64, accuracy: f64 },
    Error { id: u64, message: String },
}

impl Reply {
    pub fn id(&self) -> u64 {
        match self {
            Reply::Accuracy { id, .. } | Reply::Error { id, .. } => *id,
        }
    }
}

pub fn encode_request(request: &Request) -> String {
    serde_json::to_string(request).expect("request serializes")
}

/// Parse and check one reply line.
pub fn parse_reply(line: &str) -> Result<Reply, String> {
    let response: Response =
        serde_json::from_str(line.trim()).map_err(|e| format!("malformed reply: {e}"))?;
    match (response.accuracy, response.error) {
        (Some(accuracy), None) => Ok(Reply::Accuracy {
            id: response.id,
            accuracy,
        }),
        (None, Some(message)) => Ok(Reply::Error {
            id: response.id,
            message,
        }),
        _ => Err("reply must carry exactly one of 'accuracy' and 'error'".into()),
    }
}

#[derive(Debug, Clone)]
pub struct ExternalOptions {
    pub early_stop_c: u32,
    /// Number of worker processes; requests are spread round-robin.
    pub workers: usize,
    /// Longest wait for the next reply from a worker with pending requests.
    pub timeout: Duration,
}

impl Default for ExternalOptions {
    fn default() -> Self {
        Self {
            early_stop_c: 5,
            workers: 1,
            timeout: Duration::from_secs(3600),
        }
    }
}

struct Worker {
    child: Child,
    stdin: Option<ChildStdin>,
}

enum Event {
    Line(usize, String),
    Closed(usize),
}

pub struct ExternalEvaluator {
    command: String,
    space: ParamSpace,
    options: ExternalOptions,
    workers: Vec<Worker>,
    events: Receiver<Event>,
    next_id: u64,
    calls: u64,
    poisoned: Option<String>,
}

impl ExternalEvaluator {
    pub fn spawn(
        command: &str,
        space: ParamSpace,
        options: ExternalOptions,
    ) -> Result<Self, EvalError> {
        if command.trim().is_empty() {
            return Err(EvalError::InvalidSpec("external command is empty".into()));
        }
        if options.workers == 0 {
            return Err(EvalError::InvalidSpec("workers must be at least 1".into()));
        }
        let (tx, rx) = mpsc::channel();
        let mut workers = Vec::with_capacity(options.workers);
        for index in 0..options.workers {
            workers.push(spawn_worker(command, index, tx.clone())?);
        }
        Ok(Self {
            command: command.to_string(),
            space,
            options,
            workers,
            events: rx,
            next_id: 1,
            calls: 0,
            poisoned: None,
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn fail(&mut self, message: String, exchange: Vec<String>) -> EvalError {
        self.poisoned = Some(message.clone());
        self.shutdown(Duration::ZERO);
        EvalError::Worker { message, exchange }
    }

    fn shutdown(&mut self, grace: Duration) {
        for w in &mut self.workers {
            w.stdin.take();
        }
        let deadline = Instant::now() + grace;
        for w in &mut self.workers {
            loop {
                match w.child.try_wait() {
                    Ok(Some(_)) | Err(_) => break,
                    Ok(None) if Instant::now() < deadline => {
                        thread::sleep(Duration::from_millis(5))
                    }
                    Ok(None) => {
                        let _ = w.child.kill();
                        let _ = w.child.wait();
                        break;
                    }
                }
            }
        }
    }
}

fn spawn_worker(command: &str, index: usize, tx: Sender<Event>) -> Result<Worker, EvalError> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| EvalError::Worker {
            message: format!("failed to launch '{command}': {e}"),
            exchange: vec![],
        })?;
    let stdout = child.stdout.take().expect("stdout is piped");
    let stdin = child.stdin.take();
    thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            match line {
                Ok(l) if l.trim().is_empty() => continue,
                Ok(l) => {
                    if tx.send(Event::Line(index, l)).is_err() {
                        return;
                    }
                }
                Err(_) => break,
            }
        }
        let _ = tx.send(Event::Closed(index));
    });
    Ok(Worker { child, stdin })
}

struct Pending {
    slot: usize,
    worker: usize,
    request: String,
    sent: Instant,
}

impl Evaluator for ExternalEvaluator {
    fn evaluate_batch(&mut self, batch: &[DecodedParams]) -> Result<Vec<Score>, EvalError> {
        if let Some(reason) = &self.poisoned {
            return Err(EvalError::Worker {
                message: format!("evaluator unusable after earlier failure: {reason}"),
                exchange: vec![],
            });
        }
        for p in batch {
            if self.space.decoded(p.as_slice().to_vec()).is_err() {
                return Err(EvalError::InvalidParams { params: p.clone() });
            }
        }

        let n_workers = self.workers.len();
        let mut pending: HashMap<u64, Pending> = HashMap::new();
        let mut outstanding = vec![0usize; n_workers];
        for (slot, params) in batch.iter().enumerate() {
            let worker = slot % n_workers;
            let id = self.next_id;
            self.next_id += 1;
            let request = encode_request(&Request {
                id,
                params: params.as_slice().to_vec(),
                early_stop_c: self.options.early_stop_c,
            });
            let written = match self.workers[worker].stdin.as_mut() {
                Some(stdin) => writeln!(stdin, "{request}").and_then(|_| stdin.flush()),
                None => Err(std::io::Error::other("stdin closed")),
            };
            if let Err(e) = written {
                return Err(self.fail(
                    format!("failed to send request {id} to worker {worker}: {e}"),
                    vec![format!("> {request}")],
                ));
            }
            log::trace!("worker {worker} <- {request}");
            outstanding[worker] += 1;
            pending.insert(
                id,
                Pending {
                    slot,
                    worker,
                    request,
                    sent: Instant::now(),
                },
            );
        }

        let mut results: Vec<Option<Score>> = vec![None; batch.len()];
        let mut last_progress = vec![Instant::now(); n_workers];
        while !pending.is_empty() {
            let deadline = (0..n_workers)
                .filter(|&w| outstanding[w] > 0)
                .map(|w| last_progress[w] + self.options.timeout)
                .min()
                .expect("some worker has pending requests");
            let wait = deadline.saturating_duration_since(Instant::now());
            let event = match self.events.recv_timeout(wait) {
                Ok(event) => event,
                Err(RecvTimeoutError::Timeout) => {
                    let exchange = pending
                        .values()
                        .map(|p| format!("> {}", p.request))
                        .collect();
                    return Err(self.fail(
                        format!("no reply within {:?}", self.options.timeout),
                        exchange,
                    ));
                }
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(self.fail("all workers disconnected".into(), vec![]));
                }
            };
            match event {
                Event::Closed(worker) => {
                    if outstanding[worker] > 0 {
                        let status = self.workers[worker]
                            .child
                            .try_wait()
                            .ok()
                            .flatten()
                            .map(|s| s.to_string())
                            .unwrap_or_else(|| "still running".into());
                        let exchange = pending
                            .values()
                            .filter(|p| p.worker == worker)
                            .map(|p| format!("> {}", p.request))
                            .collect();
                        return Err(self.fail(
                            format!("worker {worker} closed its output with requests pending ({status})"),
                            exchange,
                        ));
                    }
                }
                Event::Line(worker, line) => {
                    log::trace!("worker {worker} -> {line}");
                    let reply = match parse_reply(&line) {
                        Ok(r) => r,
                        Err(reason) => {
                            return Err(self.fail(reason, vec![format!("< {line}")]));
                        }
                    };
                    let id = reply.id();
                    let Some(p) = pending.remove(&id).filter(|p| p.worker == worker) else {
                        return Err(self.fail(
                            format!("worker {worker} answered unknown request id {id}"),
                            vec![format!("< {line}")],
                        ));
                    };
                    outstanding[worker] -= 1;
                    last_progress[worker] = Instant::now();
                    let exchange = vec![format!("> {}", p.request), format!("< {line}")];
                    match reply {
                        Reply::Error { message, .. } => {
                            self.fail(message.clone(), exchange);
                            return Err(EvalError::WorkerReported { id, message });
                        }
                        Reply::Accuracy { accuracy, .. } => {
                            if !(0.0..=1.0).contains(&accuracy) {
                                self.fail(format!("accuracy {accuracy} outside [0, 1]"), vec![]);
                                return Err(EvalError::ProtocolViolation { accuracy, exchange });
                            }
                            results[p.slot] = Some(Score {
                                accuracy,
                                cost: p.sent.elapsed().as_secs_f64(),
                                params: batch[p.slot].clone(),
                            });
                        }
                    }
                }
            }
        }
        self.calls += batch.len() as u64;
        Ok(results
            .into_iter()
            .map(|s| s.expect("every slot answered"))
            .collect())
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        self.shutdown(Duration::from_secs(2));
    }
}
