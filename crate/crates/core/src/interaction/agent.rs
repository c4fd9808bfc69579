use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::budget::Budget;
use super::episode::EpisodeOutcome;
use super::task::{Action, Interface, Observation, Step, Task};

/// Distribution over actions returned by a policy.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionDist {
    Finite(Vec<(Action, f64)>),
    /// Uniform over strings of length `len` on the first `alphabet` lowercase letters.
    UniformString { alphabet: u8, len: usize },
    /// Uniform integer answer in `lo..=hi`.
    UniformInt { lo: i64, hi: i64 },
}

impl ActionDist {
    pub fn point(a: Action) -> Self {
        ActionDist::Finite(vec![(a, 1.0)])
    }

    pub fn uniform(actions: Vec<Action>) -> Self {
        let p = 1.0 / actions.len() as f64;
        ActionDist::Finite(actions.into_iter().map(|a| (a, p)).collect())
    }

    pub fn is_point(&self) -> bool {
        match self {
            ActionDist::Finite(v) => v.iter().filter(|(_, p)| *p > 0.0).count() == 1,
            _ => false,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        match self {
            ActionDist::Finite(v) => {
                if let [(a, _)] = v.as_slice() {
                    return a.clone();
                }
                let weights: Vec<f64> = v.iter().map(|(_, p)| *p).collect();
                v[crate::rng::sample_index(rng, &weights)].0.clone()
            }
            ActionDist::UniformString { alphabet, len } => Action::Say(
                (0..*len)
                    .map(|_| (b'a' + rng.gen_range(0..(*alphabet).max(1))) as char)
                    .collect(),
            ),
            ActionDist::UniformInt { lo, hi } => Action::Answer(rng.gen_range(*lo..=*hi)),
        }
    }
}

/// What an agent is told about the task it is acting in. Task internals
/// (expected answers, slip probabilities) are never exposed here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskView {
    pub task_id: String,
    pub interface: Interface,
    pub type_key: String,
    /// Index of the current leaf within a composed task, and the leaf count.
    pub segment: usize,
    pub segments: usize,
    /// Per-episode grant the run is operating under.
    pub budget: Budget,
}

impl TaskView {
    pub fn of(task: &Task) -> TaskView {
        TaskView {
            task_id: task.id.clone(),
            interface: task.interface(),
            type_key: task.type_key(),
            segment: 0,
            segments: task.leaves().len(),
            budget: Budget::ZERO,
        }
    }
}

/// Raised by agents that cannot produce a well-formed action (bridged
/// processes that crash or speak garbage).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentFault(pub String);

impl fmt::Display for AgentFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A (possibly randomized) mapping from histories to action distributions,
/// plus optional adaptation state.
pub trait Agent: Send + Sync + fmt::Debug {
    fn kind(&self) -> &str;

    /// Action distribution given the current segment's steps and observation.
    fn act(
        &self,
        view: &TaskView,
        steps: &[Step],
        observation: &Observation,
    ) -> Result<ActionDist, AgentFault>;

    /// Self-reported probability of task-level success.
    fn confidence(&self, _view: &TaskView) -> Option<f64> {
        None
    }

    /// Incorporate one finished episode. Returns the number of state cells written.
    fn update(&mut self, _task: &Task, _outcome: &EpisodeOutcome) -> usize {
        0
    }

    /// Switch between exploratory (learning) and evaluation behaviour.
    fn set_training(&mut self, _on: bool) {}

    /// True when every action distribution this agent emits is a point mass.
    fn is_deterministic(&self) -> bool {
        true
    }

    fn supports(&self, _interface: Interface) -> bool {
        true
    }

    /// Whether episodes may call this agent from several threads at once.
    fn parallel_safe(&self) -> bool {
        true
    }

    fn clone_box(&self) -> Box<dyn Agent>;
}

/// An agent snapshot. Cloning copies the adaptation state, so learning on a
/// clone never affects the original.
#[derive(Debug)]
pub struct AgentHandle {
    pub id: String,
    inner: Box<dyn Agent>,
    updates: u64,
}

impl Clone for AgentHandle {
    fn clone(&self) -> Self {
        AgentHandle {
            id: self.id.clone(),
            inner: self.inner.clone_box(),
            updates: self.updates,
        }
    }
}

impl AgentHandle {
    pub fn new(id: impl Into<String>, inner: Box<dyn Agent>) -> Self {
        AgentHandle {
            id: id.into(),
            inner,
            updates: 0,
        }
    }

    pub fn agent(&self) -> &dyn Agent {
        self.inner.as_ref()
    }

    pub fn kind(&self) -> &str {
        self.inner.kind()
    }

    /// Number of update-rule invocations applied to this snapshot so far.
    pub fn update_count(&self) -> u64 {
        self.updates
    }

    pub fn update(&mut self, task: &Task, outcome: &EpisodeOutcome) -> usize {
        self.updates += 1;
        self.inner.update(task, outcome)
    }

    pub fn set_training(&mut self, on: bool) {
        self.inner.set_training(on);
    }

    pub fn confidence(&self, view: &TaskView) -> Option<f64> {
        self.inner.confidence(view).map(|c| c.clamp(0.0, 1.0))
    }

    pub fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }
}
