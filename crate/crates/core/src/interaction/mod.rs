//! Tasks, budgets, agents, and the budgeted interaction loop.

mod agent;
mod budget;
mod episode;
mod task;

pub use agent::{ActionDist, Agent, AgentFault, AgentHandle, TaskView};
pub use budget::{spend, Budget, BudgetComponent, Spend};
pub use episode::{evaluate_performance, rollouts, run_episode, EpisodeOutcome, Estimate};
pub use task::{
    leaf_utility, utility, violated, Action, ChainEnv, EnvSpec, History, InstructionEnv,
    InstructionOp, Interface, Move, Observation, Segment, Step, Task, ToolEnv, UtilitySpec,
};
