use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Observation/action interface shared by the members of a task family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interface {
    /// Text prompt in, text answer out.
    Text,
    /// Text prompt in, calculator calls and an integer answer out.
    Calculator,
    /// Chain position in, moves out.
    Chain,
}

impl fmt::Display for Interface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interface::Text => "text",
            Interface::Calculator => "calculator",
            Interface::Chain => "chain",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "kebab-case")]
pub enum Observation {
    Prompt(String),
    Position(usize),
    ToolResult(i64),
    ToolError(String),
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Move {
    Back,
    Forward,
    /// Jumps straight to the goal; marked as a constraint violation.
    Shortcut,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "kebab-case")]
pub enum Action {
    Say(String),
    Move(Move),
    Call(String),
    Answer(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InstructionOp {
    Reverse,
    Uppercase,
    Rotate(u8),
    Echo,
}

impl InstructionOp {
    pub fn apply(&self, arg: &str, alphabet_size: u8) -> String {
        match self {
            InstructionOp::Reverse => arg.chars().rev().collect(),
            InstructionOp::Uppercase => arg.to_uppercase(),
            InstructionOp::Echo => arg.to_string(),
            InstructionOp::Rotate(k) => arg
                .chars()
                .map(|c| {
                    let m = alphabet_size.max(1) as u32;
                    let idx = (c as u32).wrapping_sub('a' as u32);
                    if idx < m {
                        char::from_u32('a' as u32 + (idx + *k as u32) % m).unwrap_or(c)
                    } else {
                        c
                    }
                })
                .collect(),
        }
    }

    /// Token shown in prompts. Rotation carries the alphabet size so that a
    /// solver can act from the prompt alone.
    pub fn prompt_token(&self, alphabet_size: u8) -> String {
        match self {
            InstructionOp::Rotate(k) => format!("rotate-{k}/{alphabet_size}"),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for InstructionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstructionOp::Reverse => f.write_str("reverse"),
            InstructionOp::Uppercase => f.write_str("uppercase"),
            InstructionOp::Echo => f.write_str("echo"),
            InstructionOp::Rotate(k) => write!(f, "rotate-{k}"),
        }
    }
}

impl FromStr for InstructionOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reverse" => Ok(InstructionOp::Reverse),
            "uppercase" | "uppercase-map" => Ok(InstructionOp::Uppercase),
            "echo" => Ok(InstructionOp::Echo),
            other => other
                .strip_prefix("rotate-")
                .and_then(|k| k.split('/').next())
                .and_then(|k| k.parse::<u8>().ok())
                .map(InstructionOp::Rotate)
                .ok_or_else(|| format!("unknown instruction operation `{other}`")),
        }
    }
}

impl TryFrom<String> for InstructionOp {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<InstructionOp> for String {
    fn from(op: InstructionOp) -> String {
        op.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionEnv {
    pub op: InstructionOp,
    pub arg: String,
    pub alphabet_size: u8,
    /// Per-character flip probability applied to the argument shown in the prompt.
    #[serde(default)]
    pub noise: f64,
    /// Output whose emission counts as a constraint violation.
    #[serde(default)]
    pub banned: Option<String>,
}

impl InstructionEnv {
    pub fn expected(&self) -> String {
        self.op.apply(&self.arg, self.alphabet_size)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolEnv {
    pub expr: String,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEnv {
    pub length: usize,
    /// Probability that a forward move leaves the position unchanged.
    pub slip: f64,
}

impl ChainEnv {
    pub fn goal(&self) -> usize {
        self.length - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnvSpec {
    Instruction(InstructionEnv),
    ToolArith(ToolEnv),
    Mdp(ChainEnv),
    /// Runs `first` to completion, then `second`.
    Composed { first: Box<Task>, second: Box<Task> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilitySpec {
    /// 1 iff the final answer equals the expected output.
    ExactMatch,
    /// 1 iff the goal state was reached within the horizon.
    ReachGoal,
    /// Product of the component utilities.
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub env: EnvSpec,
    pub utility: UtilitySpec,
    pub horizon: usize,
}

impl Task {
    pub fn interface(&self) -> Interface {
        match &self.env {
            EnvSpec::Instruction(_) => Interface::Text,
            EnvSpec::ToolArith(_) => Interface::Calculator,
            EnvSpec::Mdp(_) => Interface::Chain,
            EnvSpec::Composed { first, .. } => first.interface(),
        }
    }

    /// Leaf tasks in execution order.
    pub fn leaves(&self) -> Vec<&Task> {
        match &self.env {
            EnvSpec::Composed { first, second } => {
                let mut v = first.leaves();
                v.extend(second.leaves());
                v
            }
            _ => vec![self],
        }
    }

    pub fn find_leaf(&self, id: &str) -> Option<&Task> {
        self.leaves().into_iter().find(|t| t.id == id)
    }

    /// True when every episode on this task has the same observation law
    /// regardless of the random stream (no slip, no noise).
    pub fn is_deterministic(&self) -> bool {
        match &self.env {
            EnvSpec::Instruction(e) => e.noise == 0.0,
            EnvSpec::ToolArith(_) => true,
            EnvSpec::Mdp(c) => c.slip == 0.0 || c.slip == 1.0,
            EnvSpec::Composed { first, second } => {
                first.is_deterministic() && second.is_deterministic()
            }
        }
    }

    /// Coarse grouping used by calibration bookkeeping.
    pub fn type_key(&self) -> String {
        match &self.env {
            EnvSpec::Instruction(e) => format!("instruction:{}", e.op),
            EnvSpec::ToolArith(_) => "tool-arith".to_string(),
            EnvSpec::Mdp(c) => format!("chain:slip={}", c.slip),
            EnvSpec::Composed { first, second } => {
                format!("({})+({})", first.type_key(), second.type_key())
            }
        }
    }

    pub fn has_violation_predicate(&self) -> bool {
        self.leaves().iter().all(|leaf| match &leaf.env {
            EnvSpec::Instruction(e) => e.banned.is_some(),
            EnvSpec::Mdp(_) => true,
            _ => false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub observation: Observation,
    pub action: Action,
}

/// Interaction record for one leaf task.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Segment {
    pub task_id: String,
    pub steps: Vec<Step>,
    pub final_observation: Option<Observation>,
}

impl Segment {
    pub fn last_action(&self) -> Option<&Action> {
        self.steps.last().map(|s| &s.action)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct History {
    pub segments: Vec<Segment>,
}

impl History {
    pub fn len(&self) -> usize {
        self.segments.iter().map(|s| s.steps.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Utility of one leaf task on its interaction segment, in {0, 1}.
pub fn leaf_utility(leaf: &Task, segment: &Segment) -> f64 {
    let hit = match &leaf.env {
        EnvSpec::Instruction(e) => {
            matches!(segment.last_action(), Some(Action::Say(s)) if *s == e.expected())
        }
        EnvSpec::ToolArith(t) => {
            matches!(segment.last_action(), Some(Action::Answer(v)) if *v == t.value)
        }
        EnvSpec::Mdp(c) => {
            segment.final_observation == Some(Observation::Position(c.goal()))
                || segment
                    .steps
                    .iter()
                    .any(|s| s.observation == Observation::Position(c.goal()))
        }
        EnvSpec::Composed { .. } => unreachable!("leaf_utility called on a composed task"),
    };
    if hit {
        1.0
    } else {
        0.0
    }
}

/// Utility of a whole task on a history whose segments follow the task's
/// leaves in order. Missing segments (truncated runs) score zero.
pub fn utility(task: &Task, history: &History) -> f64 {
    task.leaves()
        .iter()
        .enumerate()
        .map(|(i, leaf)| {
            history
                .segments
                .get(i)
                .filter(|s| s.task_id == leaf.id)
                .map_or(0.0, |s| leaf_utility(leaf, s))
        })
        .product()
}

pub fn leaf_violated(leaf: &Task, segment: &Segment) -> bool {
    match &leaf.env {
        EnvSpec::Instruction(e) => match &e.banned {
            Some(b) => segment
                .steps
                .iter()
                .any(|s| matches!(&s.action, Action::Say(x) if x == b)),
            None => false,
        },
        EnvSpec::Mdp(_) => segment
            .steps
            .iter()
            .any(|s| s.action == Action::Move(Move::Shortcut)),
        _ => false,
    }
}

pub fn violated(task: &Task, history: &History) -> bool {
    task.leaves()
        .iter()
        .zip(history.segments.iter())
        .any(|(leaf, seg)| leaf_violated(leaf, seg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotate_wraps_within_alphabet() {
        assert_eq!(InstructionOp::Rotate(1).apply("ac", 3), "ba");
    }

    #[test]
    fn op_round_trips_through_strings() {
        for op in [
            InstructionOp::Reverse,
            InstructionOp::Uppercase,
            InstructionOp::Echo,
            InstructionOp::Rotate(4),
        ] {
            assert_eq!(op.to_string().parse::<InstructionOp>().unwrap(), op);
        }
        assert_eq!("rotate-2/5".parse::<InstructionOp>().unwrap(), InstructionOp::Rotate(2));
        assert!("shuffle".parse::<InstructionOp>().is_err());
    }
}
