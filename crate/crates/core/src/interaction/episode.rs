use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::agent::{AgentHandle, TaskView};
use super::budget::{Budget, BudgetComponent};
use super::task::{
    utility, violated, Action, EnvSpec, History, Move, Observation, Segment, Step, Task,
};
use crate::ecologies::expr;
use crate::error::{Error, Result};
use crate::rng::{self, SimRng};
use crate::stats::hoeffding_radius;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub score: f64,
    pub violated: bool,
    pub budget_spent: Budget,
    pub history: History,
    /// Set when the run stopped because a budget component ran out.
    pub truncated: Option<BudgetComponent>,
    /// Set when the agent failed to produce a well-formed action.
    pub protocol_error: Option<String>,
}

/// Running tally that refuses any charge which would exceed the grant.
struct Meter {
    limit: Budget,
    spent: Budget,
}

impl Meter {
    fn charge(&mut self, delta: Budget) -> std::result::Result<(), BudgetComponent> {
        let next = self.spent + delta;
        match next.first_excess(&self.limit) {
            Some(c) => Err(c),
            None => {
                self.spent = next;
                Ok(())
            }
        }
    }
}

enum Halt {
    Budget(BudgetComponent),
    Protocol(String),
}

fn noisy_arg(arg: &str, alphabet: u8, rate: f64, rng: &mut SimRng) -> String {
    if rate <= 0.0 {
        return arg.to_string();
    }
    arg.chars()
        .map(|c| {
            if rng.gen::<f64>() < rate && alphabet > 1 {
                // flip to a different letter
                let idx = (c as u8).wrapping_sub(b'a');
                let shift = rng.gen_range(1..alphabet);
                (b'a' + (idx.min(alphabet - 1) + shift) % alphabet) as char
            } else {
                c
            }
        })
        .collect()
}

fn initial_observation(leaf: &Task, rng: &mut SimRng) -> Observation {
    match &leaf.env {
        EnvSpec::Instruction(e) => Observation::Prompt(format!(
            "{} {}",
            e.op.prompt_token(e.alphabet_size),
            noisy_arg(&e.arg, e.alphabet_size, e.noise, rng)
        )),
        EnvSpec::ToolArith(t) => Observation::Prompt(t.expr.clone()),
        EnvSpec::Mdp(_) => Observation::Position(0),
        EnvSpec::Composed { .. } => unreachable!("composed tasks are flattened into leaves"),
    }
}

/// Applies `action`; returns the next observation and whether the leaf ended.
fn transition(
    leaf: &Task,
    position: &mut usize,
    action: &Action,
    rng: &mut SimRng,
) -> (Observation, bool) {
    match &leaf.env {
        EnvSpec::Instruction(_) => (Observation::End, true),
        EnvSpec::ToolArith(_) => match action {
            Action::Call(e) => match expr::eval(e) {
                Ok(v) => (Observation::ToolResult(v), false),
                Err(err) => (Observation::ToolError(err.to_string()), false),
            },
            _ => (Observation::End, true),
        },
        EnvSpec::Mdp(c) => {
            match action {
                Action::Move(Move::Forward) => {
                    let slipped = c.slip > 0.0 && rng.gen::<f64>() < c.slip;
                    if !slipped {
                        *position = (*position + 1).min(c.goal());
                    }
                }
                Action::Move(Move::Back) => *position = position.saturating_sub(1),
                Action::Move(Move::Shortcut) => *position = c.goal(),
                _ => {}
            }
            (Observation::Position(*position), *position == c.goal())
        }
        EnvSpec::Composed { .. } => unreachable!("composed tasks are flattened into leaves"),
    }
}

fn run_leaf(
    leaf: &Task,
    view: &TaskView,
    agent: &AgentHandle,
    meter: &mut Meter,
    rng: &mut SimRng,
) -> (Segment, Option<Halt>) {
    let mut segment = Segment {
        task_id: leaf.id.clone(),
        ..Segment::default()
    };
    let mut observation = initial_observation(leaf, rng);
    let mut position = 0usize;
    let step_cost = Budget {
        comp_steps: 1,
        interaction_steps: 1,
        ..Budget::ZERO
    };
    let tool_cost = Budget {
        tool_calls: 1,
        ..Budget::ZERO
    };
    for _ in 0..leaf.horizon {
        if let Err(c) = meter.charge(step_cost) {
            segment.final_observation = Some(observation);
            return (segment, Some(Halt::Budget(c)));
        }
        let dist = match agent.agent().act(view, &segment.steps, &observation) {
            Ok(d) => d,
            Err(fault) => {
                segment.final_observation = Some(observation);
                return (segment, Some(Halt::Protocol(fault.0)));
            }
        };
        let action = dist.sample(rng);
        if matches!(action, Action::Call(_)) {
            if let Err(c) = meter.charge(tool_cost) {
                segment.final_observation = Some(observation);
                return (segment, Some(Halt::Budget(c)));
            }
        }
        let (next, done) = transition(leaf, &mut position, &action, rng);
        segment.steps.push(Step {
            observation: std::mem::replace(&mut observation, next),
            action,
        });
        if done {
            break;
        }
    }
    segment.final_observation = Some(observation);
    (segment, None)
}

/// One episode of `agent` on `task` under `budget`.
///
/// Budget exhaustion truncates the run and scores the truncated history; a
/// malformed agent response yields a zero score with `protocol_error` set.
pub fn run_episode(
    task: &Task,
    agent: &AgentHandle,
    budget: &Budget,
    seed: u64,
) -> Result<EpisodeOutcome> {
    let interface = task.interface();
    if !agent.agent().supports(interface) {
        return Err(Error::InterfaceMismatch {
            agent: agent.id.clone(),
            interface: interface.to_string(),
        });
    }
    let mut rng = rng::rng(seed);
    let mut meter = Meter {
        limit: *budget,
        spent: Budget::ZERO,
    };
    let mut history = History::default();
    let mut truncated = None;
    let mut protocol_error = None;

    let episode_cost = Budget {
        episodes: 1,
        ..Budget::ZERO
    };
    if let Err(c) = meter.charge(episode_cost) {
        truncated = Some(c);
    } else {
        let leaves = task.leaves();
        let n = leaves.len();
        for (i, leaf) in leaves.into_iter().enumerate() {
            let view = TaskView {
                task_id: leaf.id.clone(),
                interface: leaf.interface(),
                type_key: leaf.type_key(),
                segment: i,
                segments: n,
                budget: *budget,
            };
            let (segment, halt) = run_leaf(leaf, &view, agent, &mut meter, &mut rng);
            history.segments.push(segment);
            match halt {
                Some(Halt::Budget(c)) => {
                    truncated = Some(c);
                    break;
                }
                Some(Halt::Protocol(msg)) => {
                    protocol_error = Some(msg);
                    break;
                }
                None => {}
            }
        }
    }

    let score = if protocol_error.is_some() {
        0.0
    } else {
        utility(task, &history)
    };
    Ok(EpisodeOutcome {
        score,
        violated: violated(task, &history),
        budget_spent: meter.spent,
        history,
        truncated,
        protocol_error,
    })
}

/// Monte Carlo estimate of expected utility with a Hoeffding half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub rollouts: usize,
}

impl Estimate {
    pub fn lower(&self) -> f64 {
        (self.mean - self.half_width).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        (self.mean + self.half_width).min(1.0)
    }
}

/// Runs `n` episodes (seeds derived from `seed` by rollout index) and returns
/// them in rollout order. A deterministic task/agent pair is run once and the
/// outcome is repeated.
pub fn rollouts(
    task: &Task,
    agent: &AgentHandle,
    budget: &Budget,
    n: usize,
    seed: u64,
) -> Result<Vec<EpisodeOutcome>> {
    let n = n.max(1);
    if task.is_deterministic() && agent.is_deterministic() {
        let one = run_episode(task, agent, budget, rng::derive(seed, 0))?;
        return Ok(vec![one; n]);
    }
    if agent.agent().parallel_safe() {
        (0..n as u64)
            .into_par_iter()
            .map(|i| run_episode(task, agent, budget, rng::derive(seed, i)))
            .collect()
    } else {
        (0..n as u64)
            .map(|i| run_episode(task, agent, budget, rng::derive(seed, i)))
            .collect()
    }
}

/// Expected utility of `agent` on `task`, estimated from `n_rollouts` episodes.
///
/// Deterministic pairs have zero half-width: every rollout returns the same score.
pub fn evaluate_performance(
    task: &Task,
    agent: &AgentHandle,
    budget: &Budget,
    n_rollouts: usize,
    seed: u64,
    alpha: f64,
) -> Result<Estimate> {
    if n_rollouts == 0 {
        return Err(Error::Precondition("n_rollouts must be at least 1".into()));
    }
    let outcomes = rollouts(task, agent, budget, n_rollouts, seed)?;
    let mean = outcomes.iter().map(|o| o.score).sum::<f64>() / outcomes.len() as f64;
    let half_width = if task.is_deterministic() && agent.is_deterministic() {
        0.0
    } else {
        hoeffding_radius(n_rollouts, alpha)
    };
    Ok(Estimate {
        mean,
        half_width,
        rollouts: n_rollouts,
    })
}
