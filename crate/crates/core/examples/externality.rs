//! With probability (1-eps)^n an n-task sample never shows the bad task, so
//! no decision rule can tell mu0 from its contamination mu1.

use agilab::agents::{make_agent, AgentSpec, Script};
use agilab::axioms::AxiomParams;
use agilab::ecologies::{make_instruction_family, GoalSpec, TaskDistribution};
use agilab::functionals::SamplingPlan;
use agilab::inference::{externality_experiment, DecisionRule, ExternalitySetup};
use agilab::interaction::{Budget, InstructionOp};

fn main() -> agilab::Result<()> {
    let family = make_instruction_family(3, 3)?;
    let g = |op, arg: &str| GoalSpec::Instruction { op, arg: arg.into() };
    let mu0 = TaskDistribution::from_goals(family.clone(), &[(g(InstructionOp::Echo, "ab"), 1.0), (g(InstructionOp::Reverse, "abc"), 1.0)])?;
    let tau_bad = family.compile(&g(InstructionOp::Uppercase, "cab"))?;
    let mut spec = AgentSpec::scripted(Script::Solver);
    spec.ops = Some(vec![InstructionOp::Echo, InstructionOp::Reverse]);
    let agent = make_agent(&spec, &[])?;

    let setup = ExternalitySetup { mu0: &mu0, tau_bad: &tau_bad, epsilon: 0.2, n: 3, trials: 20_000 };
    let mut rules = DecisionRule::built_in();
    rules.push(DecisionRule::custom("majority-pass", |z, p| {
        2 * z.iter().filter(|o| o.estimate >= p.thresholds.br).count() > z.len()
    }));
    let r = externality_experiment(&setup, &rules, &agent, &Budget::ample(), &AxiomParams::default(), &SamplingPlan::exact(8), 8)?;
    println!("absence of tau_bad: {:.4} (expected {:.4})", r.absence_frequency, r.absence_expected);
    println!("G1 under mu0: {}, under mu1: {}", r.g1_mu0.verdict, r.g1_mu1.verdict);
    for x in &r.reports {
        println!(
            "{:<16} p0 = {:.4}  p1 = {:.4}  p0+(1-p1) = {:.4}  floor {}  ceiling {}",
            x.decision_rule_id, x.p0_declare, x.p1_declare, x.correct_sum, x.floor_holds, x.ceiling_holds
        );
    }
    Ok(())
}
