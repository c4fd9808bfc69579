//! Agents living in a child process, driven over newline-delimited JSON on
//! the child's stdin/stdout.
//!
//! Harness to agent:
//!
//! ```text
//! {"type":"reset","task_interface":"text","budget":{...}}
//! {"type":"observe","payload":{"type":"prompt","value":"echo ab"},"step":0}
//! ```
//!
//! Agent to harness (zero or more `confidence` lines, then one `act`):
//!
//! ```text
//! {"type":"confidence","value":0.8}
//! {"type":"act","payload":{"type":"say","value":"ab"}}
//! ```

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::{
    Action, ActionDist, Agent, AgentFault, Budget, Interface, Observation, Step, TaskView,
};

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ToAgent {
    Reset {
        task_interface: Interface,
        budget: Budget,
    },
    Observe {
        payload: Observation,
        step: usize,
    },
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FromAgent {
    Act { payload: Action },
    Confidence { value: f64 },
}

#[derive(Debug)]
struct Session {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    dead: Option<String>,
    confidence: Option<f64>,
}

impl Session {
    fn send(&mut self, msg: &ToAgent) -> std::result::Result<(), String> {
        let stdin = self.stdin.as_mut().ok_or("stdin closed")?;
        let mut line = serde_json::to_string(msg).map_err(|e| e.to_string())?;
        line.push('\n');
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| format!("write failed: {e}"))
    }

    fn receive_act(&mut self, max_lines: u64, wait: Duration) -> std::result::Result<Action, String> {
        for _ in 0..max_lines.max(1) {
            let line = match self.lines.recv_timeout(wait) {
                Ok(l) => l,
                Err(RecvTimeoutError::Timeout) => return Err("agent timed out".into()),
                Err(RecvTimeoutError::Disconnected) => return Err("agent closed its output".into()),
            };
            match serde_json::from_str::<FromAgent>(line.trim()) {
                Ok(FromAgent::Act { payload }) => return Ok(payload),
                Ok(FromAgent::Confidence { value }) if (0.0..=1.0).contains(&value) => {
                    self.confidence = Some(value)
                }
                Ok(FromAgent::Confidence { value }) => {
                    return Err(format!("confidence {value} outside [0,1]"))
                }
                Err(e) => return Err(format!("malformed message `{}`: {e}", line.trim())),
            }
        }
        Err(format!("no act within {max_lines} messages"))
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        self.stdin.take();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// External agent process. Clones share the same process: adaptation state
/// of a bridged agent lives outside the harness and cannot be snapshotted.
#[derive(Debug, Clone)]
pub struct BridgeAgent {
    command: String,
    timeout_steps: u64,
    wait: Duration,
    deterministic: bool,
    session: Arc<Mutex<Session>>,
}

impl BridgeAgent {
    /// Spawns `command` through `sh -c`. `timeout_steps` bounds how many
    /// messages the agent may send before its `act`.
    pub fn spawn(command: &str, timeout_steps: u64) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::Spawn {
                command: command.to_string(),
                reason: e.to_string(),
            })?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().ok_or_else(|| Error::Spawn {
            command: command.to_string(),
            reason: "no stdout pipe".into(),
        })?;
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(BridgeAgent {
            command: command.to_string(),
            timeout_steps,
            wait: Duration::from_secs(10),
            deterministic: false,
            session: Arc::new(Mutex::new(Session {
                child,
                stdin,
                lines: rx,
                dead: None,
                confidence: None,
            })),
        })
    }

    /// Declare the external policy deterministic so that one rollout per
    /// deterministic task suffices.
    pub fn declare_deterministic(mut self, yes: bool) -> Self {
        self.deterministic = yes;
        self
    }

    pub fn with_wait(mut self, wait: Duration) -> Self {
        self.wait = wait;
        self
    }

    pub fn command(&self) -> &str {
        &self.command
    }
}

impl Agent for BridgeAgent {
    fn kind(&self) -> &str {
        "stdio-bridge"
    }

    fn act(&self, view: &TaskView, steps: &[Step], obs: &Observation) -> std::result::Result<ActionDist, AgentFault> {
        let mut s = self
            .session
            .lock()
            .map_err(|_| AgentFault("bridge session poisoned".into()))?;
        if let Some(reason) = &s.dead {
            return Err(AgentFault(reason.clone()));
        }
        let result = (|| {
            if steps.is_empty() {
                s.send(&ToAgent::Reset {
                    task_interface: view.interface,
                    budget: view.budget,
                })?;
            }
            s.send(&ToAgent::Observe {
                payload: obs.clone(),
                step: steps.len(),
            })?;
            s.receive_act(self.timeout_steps, self.wait)
        })();
        match result {
            Ok(a) => Ok(ActionDist::point(a)),
            Err(reason) => {
                s.dead = Some(reason.clone());
                Err(AgentFault(reason))
            }
        }
    }

    fn confidence(&self, _view: &TaskView) -> Option<f64> {
        self.session.lock().ok().and_then(|s| s.confidence)
    }

    fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    fn parallel_safe(&self) -> bool {
        false
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}

/// Wraps `command` as an agent handle.
pub fn bridge_agent(command: &str, timeout_steps: u64) -> Result<crate::interaction::AgentHandle> {
    let agent = BridgeAgent::spawn(command, timeout_steps)?;
    Ok(crate::interaction::AgentHandle::new(
        format!("bridge:{command}"),
        Box::new(agent),
    ))
}
