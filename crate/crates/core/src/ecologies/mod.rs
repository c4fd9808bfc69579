//! Built-in task families, composition, perturbations, goal compilation,
//! and drifting distribution sequences.

mod distribution;
pub mod expr;
mod family;
mod perturb;

pub use distribution::{make_drift, DriftSequence, TaskDistribution, SUM_TOL};
pub use family::{
    chain_task, compile_goal, compose, instruction_task, make_instruction_family,
    make_mdp_family, make_tool_family, tool_task, BudgetGrowth, FamilyKind, GoalSpec, TaskFamily,
};
pub use perturb::{make_perturbations, PerturbKind, PerturbationOp};
