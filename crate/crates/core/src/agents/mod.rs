//! Reference agents and the adaptation / pre-exposure protocols.

mod bridge;
mod builtin;
mod tabular;

use serde::{Deserialize, Serialize};

pub use bridge::{bridge_agent, BridgeAgent, FromAgent, ToAgent};
pub use builtin::{
    CalibratedWrapper, Memorizer, OracleAgent, RandomAgent, Script, ScriptedAgent, ToolUser,
};
pub use tabular::TabularLearner;

use crate::ecologies::TaskDistribution;
use crate::error::{Error, Result};
use crate::interaction::{
    run_episode, Agent, AgentHandle, Budget, BudgetComponent, InstructionOp, Task,
};
use crate::rng;

/// Declarative description of an agent, as found in configuration files.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentSpec {
    /// One of: random, scripted, tabular-learner, memorizer, oracle,
    /// tool-user, calibrated-wrapper, stdio-bridge.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub script: Option<Script>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ops: Option<Vec<InstructionOp>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub use_tools: Option<bool>,
    /// Memorizer fallback, or the agent wrapped by a calibrated wrapper.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<AgentSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_confidence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timeout_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deterministic: Option<bool>,
}

impl AgentSpec {
    pub fn kind(kind: &str) -> Self {
        AgentSpec {
            kind: kind.to_string(),
            ..AgentSpec::default()
        }
    }

    pub fn scripted(script: Script) -> Self {
        AgentSpec {
            script: Some(script),
            ..AgentSpec::kind("scripted")
        }
    }

    pub fn with_inner(mut self, inner: AgentSpec) -> Self {
        self.inner = Some(Box::new(inner));
        self
    }
}

fn build(spec: &AgentSpec, tasks: &[Task]) -> Result<Box<dyn Agent>> {
    Ok(match spec.kind.as_str() {
        "random" => Box::new(RandomAgent),
        "scripted" => {
            let script = spec.script.ok_or_else(|| {
                Error::InvalidAgentParams("scripted agent needs a `script`".into())
            })?;
            Box::new(ScriptedAgent {
                script,
                ops: spec.ops.clone(),
                text: spec.text.clone().unwrap_or_default(),
                confidence: spec.confidence,
            })
        }
        "tabular-learner" => Box::new(TabularLearner::default()),
        "memorizer" => Box::new(Memorizer::new(
            spec.inner.as_deref().map(|s| build(s, tasks)).transpose()?,
        )),
        "oracle" => {
            let oracle = OracleAgent::new(tasks);
            if oracle.is_empty() {
                return Err(Error::OracleWithoutTask);
            }
            Box::new(oracle)
        }
        "tool-user" => Box::new(ToolUser {
            use_tools: spec.use_tools.unwrap_or(true),
        }),
        "calibrated-wrapper" => {
            let inner = spec.inner.as_deref().ok_or_else(|| {
                Error::InvalidAgentParams("calibrated-wrapper needs an `inner` agent".into())
            })?;
            if let Some(c) = spec.fixed_confidence.filter(|c| !(0.0..=1.0).contains(c)) {
                return Err(Error::InvalidAgentParams(format!("confidence {c} outside [0,1]")));
            }
            Box::new(CalibratedWrapper::new(
                build(inner, tasks)?,
                spec.fixed_confidence,
                spec.success_threshold.unwrap_or(0.5),
            ))
        }
        "stdio-bridge" => {
            let command = spec.command.as_deref().ok_or_else(|| {
                Error::InvalidAgentParams("stdio-bridge needs a `command`".into())
            })?;
            Box::new(
                BridgeAgent::spawn(command, spec.timeout_steps.unwrap_or(16))?
                    .declare_deterministic(spec.deterministic.unwrap_or(false)),
            )
        }
        other => return Err(Error::UnknownAgentKind(other.to_string())),
    })
}

/// Builds an agent from its description. `tasks` binds oracle agents (and
/// oracles nested in wrappers); other kinds ignore it.
pub fn make_agent(spec: &AgentSpec, tasks: &[Task]) -> Result<AgentHandle> {
    let inner = build(spec, tasks)?;
    let id = spec.id.clone().unwrap_or_else(|| match spec.script {
        Some(s) => format!("{}:{}", spec.kind, serde_json::to_value(s).map(|v| v.as_str().unwrap_or_default().to_string()).unwrap_or_default()),
        None => spec.kind.clone(),
    });
    Ok(AgentHandle::new(id, inner))
}

/// Oracle bound to a single task.
pub fn oracle(task: &Task) -> AgentHandle {
    AgentHandle::new(format!("oracle({})", task.id), Box::new(OracleAgent::new([task])))
}

/// Within-task adaptation: `within_task_updates` learning episodes on the
/// task, each followed by one invocation of the agent's update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AdaptationProtocol {
    pub within_task_updates: u64,
}

/// Pre-exposure phase: `n_tasks` i.i.d. draws from the target distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PreExposure {
    pub n_tasks: u64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PreExposed {
    pub agent: AgentHandle,
    /// Task ids drawn during pre-exposure, in draw order.
    pub drawn: Vec<String>,
}

fn require(component: BudgetComponent, needed: u64, budget: &Budget) -> Result<()> {
    let available = budget.get(component);
    if needed > available {
        return Err(Error::BudgetInfeasible {
            component,
            needed,
            available,
        });
    }
    Ok(())
}

/// Runs one learning episode and applies the update rule; returns cells written.
fn learn_from(agent: &mut AgentHandle, task: &Task, budget: &Budget, seed: u64) -> Result<u64> {
    let outcome = run_episode(task, agent, budget, seed)?;
    Ok(agent.update(task, &outcome) as u64)
}

/// Returns the agent after `protocol.within_task_updates` updates on `task`.
/// The input snapshot is left untouched.
pub fn adapt_within_task(
    agent: &AgentHandle,
    task: &Task,
    protocol: &AdaptationProtocol,
    budget: &Budget,
    seed: u64,
) -> Result<AgentHandle> {
    let n = protocol.within_task_updates;
    let horizon = task.horizon as u64;
    require(BudgetComponent::Episodes, n, budget)?;
    // one policy call per step plus one per update
    require(BudgetComponent::CompSteps, n * (horizon + 1), budget)?;
    require(BudgetComponent::InteractionSteps, n * horizon, budget)?;

    let mut adapted = agent.clone();
    if n == 0 {
        return Ok(adapted);
    }
    adapted.set_training(true);
    let mut cells = 0u64;
    for k in 0..n {
        cells += learn_from(&mut adapted, task, budget, rng::derive(seed, k))?;
        require(BudgetComponent::MemCells, cells, budget)?;
    }
    adapted.set_training(false);
    Ok(adapted)
}

/// Builds the pre-exposed agent from `agent`, which stays unchanged and
/// serves as the scratch baseline.
pub fn pre_expose(
    agent: &AgentHandle,
    mu: &TaskDistribution,
    exposure: &PreExposure,
    budget: &Budget,
) -> Result<PreExposed> {
    let k = exposure.n_tasks;
    require(BudgetComponent::Episodes, k, budget)?;
    let mut exposed = agent.clone();
    let mut drawn = Vec::with_capacity(k as usize);
    if k == 0 {
        return Ok(PreExposed { agent: exposed, drawn });
    }
    let mut r = rng::rng(exposure.seed);
    exposed.set_training(true);
    let mut cells = 0u64;
    for i in 0..k {
        let task = mu.sample(&mut r).clone();
        cells += learn_from(&mut exposed, &task, budget, rng::derive(exposure.seed, i + 1))?;
        require(BudgetComponent::MemCells, cells, budget)?;
        drawn.push(task.id);
    }
    exposed.set_training(false);
    Ok(PreExposed {
        agent: exposed,
        drawn,
    })
}
