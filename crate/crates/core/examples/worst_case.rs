//! The worst distribution over a support is a point mass on the weakest
//! task; a TV-limited adversary interpolates towards it.

use agilab::adversary::{tv_constrained_adversary, worst_case_distribution};
use agilab::agents::{make_agent, AgentSpec, Script};
use agilab::ecologies::{make_instruction_family, GoalSpec, TaskDistribution};
use agilab::functionals::{estimate_generality, SamplingPlan};
use agilab::interaction::{Budget, InstructionOp};

fn main() -> agilab::Result<()> {
    let family = make_instruction_family(3, 3)?;
    let g = |op, arg: &str| GoalSpec::Instruction { op, arg: arg.into() };
    let mu = TaskDistribution::from_goals(
        family.clone(),
        &[
            (g(InstructionOp::Reverse, "abc"), 0.4),
            (g(InstructionOp::Echo, "ba"), 0.3),
            (g(InstructionOp::Uppercase, "cab"), 0.2),
            (g(InstructionOp::Rotate(1), "ac"), 0.1),
        ],
    )?;
    let mut spec = AgentSpec::scripted(Script::Solver);
    spec.ops = Some(vec![InstructionOp::Reverse, InstructionOp::Echo]);
    let agent = make_agent(&spec, &[])?;
    let (budget, plan) = (Budget::ample(), SamplingPlan::exact(4));

    let (star, value) = worst_case_distribution(&family, mu.support(), &agent, &budget, &plan, 4)?;
    println!("inf over the simplex = {value}, attained at {}", star.support()[0].id);
    for eta in [0.0, 0.1, 0.25, 0.5, 1.0] {
        let d = tv_constrained_adversary(&mu, &agent, &budget, eta, &plan, 4)?;
        let gen = estimate_generality(&d, &agent, &budget, &plan, 4)?;
        println!("eta = {eta:<4}  G = {:.3}", gen.mean);
    }
    Ok(())
}
