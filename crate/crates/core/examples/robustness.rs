//! A slip increment ruins 0.4 of the mass; G5 fails exactly when the
//! tolerated degradation probability is below that.

use agilab::adversary::robustness_counterexample;
use agilab::agents::{make_agent, AgentSpec, Script};
use agilab::axioms::{check_g5, AxiomParams};
use agilab::ecologies::{make_mdp_family, GoalSpec, PerturbationOp, TaskDistribution};
use agilab::functionals::SamplingPlan;
use agilab::interaction::Budget;

fn main() -> agilab::Result<()> {
    let family = make_mdp_family(3, &[0.0, 1.0])?;
    let chain = |slip| GoalSpec::Chain { slip, length: None, horizon: None };
    let mu = TaskDistribution::from_goals(family, &[(chain(0.0), 0.4), (chain(1.0), 0.6)])?;
    let agent = make_agent(&AgentSpec::scripted(Script::AlwaysForward), &[])?;
    let ops = [PerturbationOp::slip_increment(1.0)];
    let (budget, plan) = (Budget::ample(), SamplingPlan::exact(16));
    let mut params = AxiomParams::default();

    if let Some(c) = robustness_counterexample(&mu, &agent, &ops, &budget, &params, &plan, 5)? {
        println!("{}: degradation mass {} on {:?}", c.perturbation, c.event_mass, c.witnesses);
    }
    for d in [0.1, 0.3, 0.39, 0.4, 0.6] {
        params.tails.rb = d;
        let r = check_g5(&mu, &agent, &ops, &budget, &params, &plan, 5)?;
        println!("delta_rb = {d:<5} G5 {}", r.verdict);
    }
    Ok(())
}
