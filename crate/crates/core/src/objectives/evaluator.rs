//! Client for an external evaluator process.
//!
//! The evaluator is spawned once per run and spoken to over its standard
//! streams, one JSON document per line. Requests carry an id and the design
//! vector; responses carry the id back with the objective and a validity
//! flag, in any order. A design whose response never arrives (or arrives
//! malformed) is retried once and then falls back to `(0, invalid)` with a
//! warning; the run only aborts if the process dies mid-batch.
//!
//! Request:  `{"id": 7, "weights": [0.9, -0.14, 0.22, -0.25, 0.99, 0.5]}`
//! Response: `{"id": 7, "objective": 0.42, "valid": true}`

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::ObjError;
use crate::optimizer::{EvalError, Objective};

/// How to start and talk to the evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatorBinding {
    pub program: String,
    pub args: Vec<String>,
    /// Quiet period after which outstanding requests are retried, then
    /// written off as `(0, invalid)`.
    pub response_timeout: Duration,
}

impl EvaluatorBinding {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            program: program.into(),
            args,
            response_timeout: Duration::from_secs(10),
        }
    }
}

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    weights: &'a [f64],
}

#[derive(Deserialize)]
struct Response {
    id: u64,
    objective: f64,
    valid: bool,
}

pub struct EvaluatorClient {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    timeout: Duration,
    next_id: u64,
}

impl EvaluatorClient {
    /// Spawns the evaluator and wires up a reader thread for its stdout.
    pub fn spawn(binding: &EvaluatorBinding) -> Result<Self, ObjError> {
        let mut child = Command::new(&binding.program)
            .args(&binding.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| ObjError::EvaluatorSpawn(format!("{}: {e}", binding.program)))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                match line {
                    Ok(l) => {
                        if tx.send(l).is_err() {
                            break;
                        }
                    }
                    Err(_) => break,
                }
            }
        });
        Ok(Self {
            child,
            stdin: Some(stdin),
            lines: rx,
            timeout: binding.response_timeout,
            next_id: 0,
        })
    }

    fn send_requests(&mut self, ids: &[u64], designs: &[&[f64]]) -> Result<(), ObjError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| ObjError::EvaluatorFailure("stdin already closed".into()))?;
        let mut payload = String::new();
        for (&id, design) in ids.iter().zip(designs) {
            let line = serde_json::to_string(&Request {
                id,
                weights: design,
            })
            .expect("request serialization cannot fail");
            payload.push_str(&line);
            payload.push('\n');
        }
        stdin
            .write_all(payload.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| ObjError::EvaluatorFailure(format!("write failed: {e}")))
    }

    /// Collects responses for `pending` ids until all arrive or the quiet
    /// period elapses. Returns an error only when the stream closed with
    /// requests still outstanding (the process exited mid-batch).
    fn collect(
        &mut self,
        pending: &mut HashMap<u64, usize>,
        results: &mut [Option<(f64, bool)>],
    ) -> Result<(), ObjError> {
        while !pending.is_empty() {
            match self.lines.recv_timeout(self.timeout) {
                Ok(line) => match serde_json::from_str::<Response>(&line) {
                    Ok(r) => {
                        if let Some(slot) = pending.remove(&r.id) {
                            results[slot] = Some((r.objective, r.valid));
                        } else {
                            log::warn!("evaluator answered unknown or duplicate id {}", r.id);
                        }
                    }
                    Err(e) => log::warn!("malformed evaluator response {line:?}: {e}"),
                },
                Err(RecvTimeoutError::Timeout) => return Ok(()),
                Err(RecvTimeoutError::Disconnected) => {
                    let status = match self.child.try_wait() {
                        Ok(Some(s)) => format!("exit status {s}"),
                        Ok(None) => "stdout closed".into(),
                        Err(e) => format!("unknown state: {e}"),
                    };
                    return Err(ObjError::EvaluatorFailure(format!(
                        "evaluator stopped ({status}) with {} responses outstanding",
                        pending.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluates one batch. Responses may arrive in any order; they are
    /// matched to designs by id.
    pub fn evaluate_batch(&mut self, designs: &[Vec<f64>]) -> Result<Vec<(f64, bool)>, ObjError> {
        let ids: Vec<u64> = designs
            .iter()
            .map(|_| {
                let id = self.next_id;
                self.next_id += 1;
                id
            })
            .collect();
        let refs: Vec<&[f64]> = designs.iter().map(Vec::as_slice).collect();
        self.send_requests(&ids, &refs)?;

        let mut results: Vec<Option<(f64, bool)>> = vec![None; designs.len()];
        let mut pending: HashMap<u64, usize> =
            ids.iter().enumerate().map(|(slot, &id)| (id, slot)).collect();
        self.collect(&mut pending, &mut results)?;

        if !pending.is_empty() {
            // One retry for the silent ids, then give up on them.
            let retry_ids: Vec<u64> = pending.keys().copied().collect();
            log::warn!("retrying {} unanswered evaluations", retry_ids.len());
            let retry_designs: Vec<&[f64]> = retry_ids
                .iter()
                .map(|id| designs[pending[id]].as_slice())
                .collect();
            self.send_requests(&retry_ids, &retry_designs)?;
            self.collect(&mut pending, &mut results)?;
            for (&id, &slot) in &pending {
                log::warn!("evaluation id {id} never answered; recording (0, invalid)");
                results[slot] = Some((0.0, false));
            }
        }
        Ok(results.into_iter().map(|r| r.expect("all slots filled")).collect())
    }

    /// Closes stdin (end-of-run signal) and reaps the child.
    pub fn shutdown(&mut self) {
        self.stdin.take();
        for _ in 0..50 {
            match self.child.try_wait() {
                Ok(Some(_)) => return,
                Ok(None) => std::thread::sleep(Duration::from_millis(20)),
                Err(_) => break,
            }
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for EvaluatorClient {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// An external evaluator behaving as a run objective.
pub struct ExternalObjective {
    client: EvaluatorClient,
}

impl ExternalObjective {
    pub fn spawn(binding: &EvaluatorBinding) -> Result<Self, ObjError> {
        Ok(Self {
            client: EvaluatorClient::spawn(binding)?,
        })
    }
}

impl Objective for ExternalObjective {
    fn evaluate_batch(&mut self, designs: &[Vec<f64>]) -> Result<Vec<(f64, bool)>, EvalError> {
        self.client
            .evaluate_batch(designs)
            .map_err(|e| EvalError::new(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_and_response_wire_shapes() {
        let line = serde_json::to_string(&Request {
            id: 7,
            weights: &[0.5, -0.25],
        })
        .unwrap();
        assert_eq!(line, r#"{"id":7,"weights":[0.5,-0.25]}"#);
        let r: Response =
            serde_json::from_str(r#"{"id": 3, "objective": 1.25, "valid": false}"#).unwrap();
        assert_eq!(r.id, 3);
        assert_eq!(r.objective, 1.25);
        assert!(!r.valid);
    }

    #[test]
    fn spawn_failure_is_reported() {
        let binding = EvaluatorBinding::new("/nonexistent/evaluator-binary", vec![]);
        assert!(matches!(
            EvaluatorClient::spawn(&binding),
            Err(ObjError::EvaluatorSpawn(_))
        ));
    }
}
