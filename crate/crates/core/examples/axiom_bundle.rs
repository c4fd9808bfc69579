//! The full bundle on a memorizer backed by a partial solver.

use agilab::agents::{make_agent, AdaptationProtocol, AgentSpec, PreExposure, Script};
use agilab::axioms::{check_bundle, check_weak_variants, AxiomParams, BundleInputs};
use agilab::ecologies::{make_instruction_family, GoalSpec, PerturbationOp, TaskDistribution};
use agilab::functionals::SamplingPlan;
use agilab::interaction::{Budget, InstructionOp};

fn main() -> agilab::Result<()> {
    let family = make_instruction_family(3, 3)?.with_banned("zz");
    let g = |op, arg: &str| GoalSpec::Instruction { op, arg: arg.into() };
    let goals = [
        (g(InstructionOp::Echo, "ab"), 0.45),
        (g(InstructionOp::Reverse, "abc"), 0.45),
        (g(InstructionOp::Uppercase, "cab"), 0.05),
        (g(InstructionOp::Rotate(1), "ac"), 0.05),
    ];
    let mu = TaskDistribution::from_goals(family, &goals)?;

    let mut solver = AgentSpec::scripted(Script::Solver);
    solver.ops = Some(vec![InstructionOp::Echo, InstructionOp::Reverse]);
    let agent = make_agent(&AgentSpec::kind("memorizer").with_inner(solver), &[])?;
    let mut baseline = AgentSpec::scripted(Script::Constant);
    baseline.text = Some("?".into());

    let mut params = AxiomParams::default();
    params.thresholds.tr = 0.05;
    let mut inp = BundleInputs::new(Budget::ample(), params, SamplingPlan::exact(16));
    inp.adaptation = Some(AdaptationProtocol { within_task_updates: 1 });
    inp.exposure = Some(PreExposure { n_tasks: 200, seed: 3 });
    inp.perturbations = Some(vec![PerturbationOp::paraphrase(1)]);
    inp.goals = Some(goals[..2].to_vec());
    inp.tool_baseline = Some(make_agent(&baseline, &[])?);

    let bundle = check_bundle(&mu, &agent, &inp, 11)?;
    for r in bundle.reports.iter().chain(&check_weak_variants(&mu, &agent, &inp, 11)?) {
        println!("{:<4} {:<13} estimate {:.3} in [{:.3}, {:.3}] target {}", r.axiom.to_string(), r.verdict.to_string(), r.estimate, r.ci.lower, r.ci.upper, r.target);
    }
    println!("overall: {}", bundle.overall);
    Ok(())
}
