use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ecologies::expr;
use crate::interaction::{
    Action, ActionDist, Agent, AgentFault, EnvSpec, EpisodeOutcome, InstructionOp, Interface,
    Move, Observation, Step, Task, TaskView,
};

/// Action that earns zero utility on any built-in task.
pub(crate) fn failing_action(interface: Interface) -> Action {
    match interface {
        Interface::Text | Interface::Calculator => Action::Say("?".into()),
        Interface::Chain => Action::Move(Move::Back),
    }
}

/// Best action on a known leaf task.
pub(crate) fn oracle_action(leaf: &Task) -> Action {
    match &leaf.env {
        EnvSpec::Instruction(e) => Action::Say(e.expected()),
        EnvSpec::ToolArith(t) => Action::Answer(t.value),
        EnvSpec::Mdp(_) => Action::Move(Move::Forward),
        EnvSpec::Composed { .. } => unreachable!("oracle acts on leaves"),
    }
}

fn prompt(observation: &Observation, steps: &[Step]) -> Option<String> {
    if let Observation::Prompt(p) = observation {
        return Some(p.clone());
    }
    steps.iter().find_map(|s| match &s.observation {
        Observation::Prompt(p) => Some(p.clone()),
        _ => None,
    })
}

/// Solves an instruction prompt `"<op> <arg>"`. Rotation tokens carry the
/// alphabet size as `rotate-k/m`.
pub(crate) fn solve_prompt(p: &str) -> Option<(InstructionOp, String)> {
    let (token, arg) = p.split_once(' ')?;
    let op: InstructionOp = token.parse().ok()?;
    let alphabet = token
        .split_once('/')
        .and_then(|(_, m)| m.parse::<u8>().ok())
        .unwrap_or(26);
    Some((op, op.apply(arg, alphabet)))
}

fn op_of_type_key(key: &str) -> Option<InstructionOp> {
    key.strip_prefix("instruction:")?.parse().ok()
}

#[derive(Debug, Clone, Default)]
pub struct RandomAgent;

impl Agent for RandomAgent {
    fn kind(&self) -> &str {
        "random"
    }

    fn act(&self, view: &TaskView, steps: &[Step], obs: &Observation) -> Result<ActionDist, AgentFault> {
        Ok(match view.interface {
            Interface::Text => {
                let len = prompt(obs, steps)
                    .and_then(|p| p.split_once(' ').map(|(_, a)| a.chars().count()))
                    .unwrap_or(1);
                ActionDist::UniformString { alphabet: 26, len }
            }
            Interface::Calculator => ActionDist::UniformInt { lo: -100, hi: 100 },
            Interface::Chain => {
                ActionDist::uniform(vec![Action::Move(Move::Back), Action::Move(Move::Forward)])
            }
        })
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Script {
    AlwaysForward,
    AlwaysBack,
    /// Always takes the forbidden shortcut move.
    Shortcut,
    /// Emits a fixed text.
    Constant,
    /// Computes instruction answers and arithmetic from the prompt; moves forward on chains.
    Solver,
    /// Like `Solver` on single tasks, fails on every composed task.
    SinglesOnly,
}

#[derive(Debug, Clone)]
pub struct ScriptedAgent {
    pub script: Script,
    /// Restricts the solver to these operations (others are answered wrongly).
    pub ops: Option<Vec<InstructionOp>>,
    pub text: String,
    pub confidence: Option<f64>,
}

impl ScriptedAgent {
    pub fn new(script: Script) -> Self {
        ScriptedAgent {
            script,
            ops: None,
            text: String::new(),
            confidence: None,
        }
    }

    fn knows(&self, op: InstructionOp) -> bool {
        self.ops.as_ref().is_none_or(|ops| ops.contains(&op))
    }

    fn solve(&self, view: &TaskView, steps: &[Step], obs: &Observation) -> Action {
        match view.interface {
            Interface::Text => prompt(obs, steps)
                .and_then(|p| solve_prompt(&p))
                .filter(|(op, _)| self.knows(*op))
                .map_or_else(|| failing_action(view.interface), |(_, ans)| Action::Say(ans)),
            Interface::Calculator => prompt(obs, steps)
                .and_then(|p| expr::eval(&p).ok())
                .map_or_else(|| failing_action(view.interface), Action::Answer),
            Interface::Chain => Action::Move(Move::Forward),
        }
    }
}

impl Agent for ScriptedAgent {
    fn kind(&self) -> &str {
        "scripted"
    }

    fn act(&self, view: &TaskView, steps: &[Step], obs: &Observation) -> Result<ActionDist, AgentFault> {
        let a = match self.script {
            Script::AlwaysForward => Action::Move(Move::Forward),
            Script::AlwaysBack => Action::Move(Move::Back),
            Script::Shortcut => Action::Move(Move::Shortcut),
            Script::Constant => match view.interface {
                Interface::Chain => Action::Move(Move::Back),
                _ => Action::Say(self.text.clone()),
            },
            Script::Solver => self.solve(view, steps, obs),
            Script::SinglesOnly => {
                if view.segments > 1 {
                    failing_action(view.interface)
                } else {
                    self.solve(view, steps, obs)
                }
            }
        };
        Ok(ActionDist::point(a))
    }

    fn confidence(&self, view: &TaskView) -> Option<f64> {
        if let Some(c) = self.confidence {
            return Some(c);
        }
        match self.script {
            Script::Solver => Some(match op_of_type_key(&view.type_key) {
                Some(op) if !self.knows(op) => 0.0,
                _ => 1.0,
            }),
            _ => None,
        }
    }

    fn supports(&self, interface: Interface) -> bool {
        match self.script {
            Script::AlwaysForward | Script::AlwaysBack | Script::Shortcut => {
                interface == Interface::Chain
            }
            _ => true,
        }
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}

/// Task-dependent oracle: plays the best non-violating policy on each bound task.
#[derive(Debug, Clone)]
pub struct OracleAgent {
    leaves: BTreeMap<String, Task>,
}

impl OracleAgent {
    pub fn new<'a, I: IntoIterator<Item = &'a Task>>(tasks: I) -> Self {
        let mut leaves = BTreeMap::new();
        for t in tasks {
            for leaf in t.leaves() {
                leaves.insert(leaf.id.clone(), leaf.clone());
            }
        }
        OracleAgent { leaves }
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }
}

impl Agent for OracleAgent {
    fn kind(&self) -> &str {
        "oracle"
    }

    fn act(&self, view: &TaskView, _steps: &[Step], _obs: &Observation) -> Result<ActionDist, AgentFault> {
        Ok(ActionDist::point(match self.leaves.get(&view.task_id) {
            Some(leaf) => oracle_action(leaf),
            None => failing_action(view.interface),
        }))
    }

    fn confidence(&self, view: &TaskView) -> Option<f64> {
        Some(if self.leaves.contains_key(&view.task_id) { 1.0 } else { 0.0 })
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}

/// Solves arithmetic only through the calculator tool.
#[derive(Debug, Clone)]
pub struct ToolUser {
    pub use_tools: bool,
}

impl Agent for ToolUser {
    fn kind(&self) -> &str {
        "tool-user"
    }

    fn act(&self, view: &TaskView, steps: &[Step], obs: &Observation) -> Result<ActionDist, AgentFault> {
        if view.interface != Interface::Calculator || !self.use_tools {
            return Ok(ActionDist::point(Action::Say("unknown".into())));
        }
        let a = match obs {
            Observation::ToolResult(v) => Action::Answer(*v),
            Observation::Prompt(p) if steps.is_empty() => Action::Call(p.clone()),
            _ => Action::Say("unknown".into()),
        };
        Ok(ActionDist::point(a))
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}

/// Stores exact task-id → best-response pairs from observed tasks.
#[derive(Debug)]
pub struct Memorizer {
    known: BTreeMap<String, Task>,
    fallback: Option<Box<dyn Agent>>,
}

impl Clone for Memorizer {
    fn clone(&self) -> Self {
        Memorizer {
            known: self.known.clone(),
            fallback: self.fallback.as_ref().map(|f| f.clone_box()),
        }
    }
}

impl Memorizer {
    pub fn new(fallback: Option<Box<dyn Agent>>) -> Self {
        Memorizer {
            known: BTreeMap::new(),
            fallback,
        }
    }

    pub fn knows(&self, task_id: &str) -> bool {
        self.known.contains_key(task_id)
    }

    pub fn memorized(&self) -> usize {
        self.known.len()
    }
}

impl Agent for Memorizer {
    fn kind(&self) -> &str {
        "memorizer"
    }

    fn act(&self, view: &TaskView, steps: &[Step], obs: &Observation) -> Result<ActionDist, AgentFault> {
        if let Some(leaf) = self.known.get(&view.task_id) {
            return Ok(ActionDist::point(oracle_action(leaf)));
        }
        match &self.fallback {
            Some(f) => f.act(view, steps, obs),
            None => Ok(ActionDist::point(failing_action(view.interface))),
        }
    }

    fn confidence(&self, view: &TaskView) -> Option<f64> {
        if self.known.contains_key(&view.task_id) {
            return Some(1.0);
        }
        Some(
            self.fallback
                .as_ref()
                .and_then(|f| f.confidence(view))
                .unwrap_or(0.0),
        )
    }

    fn update(&mut self, task: &Task, _outcome: &EpisodeOutcome) -> usize {
        let mut written = 0;
        for leaf in task.leaves() {
            if self.known.insert(leaf.id.clone(), leaf.clone()).is_none() {
                written += 1;
            }
        }
        written
    }

    fn is_deterministic(&self) -> bool {
        self.fallback.as_ref().is_none_or(|f| f.is_deterministic())
    }

    fn supports(&self, interface: Interface) -> bool {
        self.fallback.as_ref().is_none_or(|f| f.supports(interface))
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}

/// Wraps an agent and reports, as confidence, the success frequency it
/// observed per task type during learning (0.5 before any observation), or
/// a fixed value when configured as a miscalibrated foil.
#[derive(Debug)]
pub struct CalibratedWrapper {
    inner: Box<dyn Agent>,
    counts: BTreeMap<String, (u64, u64)>,
    fixed: Option<f64>,
    success_threshold: f64,
}

impl Clone for CalibratedWrapper {
    fn clone(&self) -> Self {
        CalibratedWrapper {
            inner: self.inner.clone_box(),
            counts: self.counts.clone(),
            fixed: self.fixed,
            success_threshold: self.success_threshold,
        }
    }
}

impl CalibratedWrapper {
    pub fn new(inner: Box<dyn Agent>, fixed: Option<f64>, success_threshold: f64) -> Self {
        CalibratedWrapper {
            inner,
            counts: BTreeMap::new(),
            fixed,
            success_threshold,
        }
    }

    pub fn observations(&self, type_key: &str) -> u64 {
        self.counts.get(type_key).map_or(0, |(_, n)| *n)
    }
}

impl Agent for CalibratedWrapper {
    fn kind(&self) -> &str {
        "calibrated-wrapper"
    }

    fn act(&self, view: &TaskView, steps: &[Step], obs: &Observation) -> Result<ActionDist, AgentFault> {
        self.inner.act(view, steps, obs)
    }

    fn confidence(&self, view: &TaskView) -> Option<f64> {
        if let Some(c) = self.fixed {
            return Some(c);
        }
        Some(match self.counts.get(&view.type_key) {
            Some((s, n)) if *n > 0 => *s as f64 / *n as f64,
            _ => 0.5,
        })
    }

    fn update(&mut self, task: &Task, outcome: &EpisodeOutcome) -> usize {
        let entry = self.counts.entry(task.type_key()).or_insert((0, 0));
        entry.1 += 1;
        if outcome.score >= self.success_threshold {
            entry.0 += 1;
        }
        1 + self.inner.update(task, outcome)
    }

    fn set_training(&mut self, on: bool) {
        self.inner.set_training(on);
    }

    fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }

    fn supports(&self, interface: Interface) -> bool {
        self.inner.supports(interface)
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}
