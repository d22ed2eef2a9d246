//! Subprocess scorer speaking a line-delimited JSON protocol.
//!
//! For each pair the engine writes one request line to the child's stdin and
//! reads one response line from its stdout:
//!
//! ```text
//! -> {"id": 7, "a": "vitamin c can cure coronavirus.", "b": "vitamin c prevents coronavirus."}
//! <- {"id": 7, "score": 0.91}
//! ```
//!
//! Responses must arrive in request order and echo the request id. A
//! malformed line, a wrong id or a score outside `[0, 1]` fails that pair
//! only. Once the process exits or its pipes break, every later pair fails.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{BackendError, ScoreError, Similarity};

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    a: &'a str,
    b: &'a str,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Response {
    id: u64,
    score: f64,
}

struct Channel {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
    dead: Option<String>,
}

pub struct ExternalBackend {
    command: String,
    channel: Mutex<Channel>,
}

impl std::fmt::Debug for ExternalBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalBackend")
            .field("command", &self.command)
            .finish()
    }
}

impl ExternalBackend {
    /// Starts `command_line`, split with POSIX shell quoting rules.
    pub fn spawn(command_line: &str) -> Result<Self, BackendError> {
        let argv = shlex::split(command_line)
            .ok_or_else(|| BackendError::BadCommand(command_line.to_string()))?;
        let (program, args) = argv.split_first().ok_or(BackendError::EmptyCommand)?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| BackendError::Spawn {
                command: command_line.to_string(),
                source,
            })?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("stdout is piped"));
        Ok(Self {
            command: command_line.to_string(),
            channel: Mutex::new(Channel {
                child,
                stdin,
                stdout,
                next_id: 0,
                dead: None,
            }),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }
}

impl Channel {
    fn fail(&mut self, reason: String) -> ScoreError {
        self.dead = Some(reason.clone());
        ScoreError::Process(reason)
    }

    fn exchange(&mut self, a: &str, b: &str) -> Result<f64, ScoreError> {
        if let Some(reason) = &self.dead {
            return Err(ScoreError::Process(reason.clone()));
        }
        let id = self.next_id;
        self.next_id += 1;
        let mut line = serde_json::to_string(&Request { id, a, b })
            .map_err(|e| ScoreError::Protocol(e.to_string()))?;
        line.push('\n');
        let Some(stdin) = self.stdin.as_mut() else {
            return Err(self.fail("stdin closed".into()));
        };
        if let Err(e) = stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush()) {
            return Err(self.fail(format!("write failed: {e}")));
        }
        loop {
            let mut response = String::new();
            match self.stdout.read_line(&mut response) {
                Ok(0) => {
                    let status = self
                        .child
                        .try_wait()
                        .ok()
                        .flatten()
                        .map(|s| s.to_string())
                        .unwrap_or_else(|| "closed stdout".into());
                    return Err(self.fail(format!("backend exited ({status})")));
                }
                Ok(_) => {}
                Err(e) => return Err(self.fail(format!("read failed: {e}"))),
            }
            let parsed: Response = serde_json::from_str(response.trim_end()).map_err(|_| {
                ScoreError::Protocol(format!("unexpected output line `{}`", response.trim_end()))
            })?;
            if parsed.id < id {
                // late answer to a request that already failed
                continue;
            }
            if parsed.id != id {
                return Err(ScoreError::Protocol(format!(
                    "response id {} does not match request id {id}",
                    parsed.id
                )));
            }
            if !(0.0..=1.0).contains(&parsed.score) {
                return Err(ScoreError::OutOfRange(parsed.score));
            }
            return Ok(parsed.score);
        }
    }
}

impl Similarity for ExternalBackend {
    fn name(&self) -> String {
        format!("external({})", self.command)
    }

    fn score_pair(&self, a: &str, b: &str) -> Result<f64, ScoreError> {
        let mut channel = self
            .channel
            .lock()
            .map_err(|_| ScoreError::Process("backend lock poisoned".into()))?;
        channel.exchange(a, b)
    }
}

impl Drop for ExternalBackend {
    fn drop(&mut self) {
        if let Ok(channel) = self.channel.get_mut() {
            channel.stdin.take();
            let _ = channel.child.kill();
            let _ = channel.child.wait();
        }
    }
}
