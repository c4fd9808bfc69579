//! Small-mass shifts: moving eta of the mass onto a failing task flips G1
//! while staying within eta in total variation.

use agilab::adversary::fragility_demo;
use agilab::agents::{make_agent, AgentSpec, Script};
use agilab::axioms::AxiomParams;
use agilab::ecologies::{make_mdp_family, GoalSpec, TaskDistribution};
use agilab::functionals::SamplingPlan;
use agilab::interaction::Budget;

fn main() -> agilab::Result<()> {
    let family = make_mdp_family(3, &[0.0, 1.0])?;
    let mu = TaskDistribution::from_goals(
        family,
        &[
            (GoalSpec::Chain { slip: 0.0, length: Some(3), horizon: None }, 0.5),
            (GoalSpec::Chain { slip: 0.0, length: Some(4), horizon: None }, 0.5),
        ],
    )?;
    let agent = make_agent(&AgentSpec::scripted(Script::AlwaysForward), &[])?;
    let params = AxiomParams::default();
    println!("{:>5} {:>8} {:>8} {:>6} {:>6}", "eta", "tv", "F mass", "pre", "post");
    for eta in [0.15, 0.3, 0.6] {
        let c = fragility_demo(&mu, &agent, &Budget::ample(), &params, eta, &SamplingPlan::exact(8), 2)?;
        let v = |r: &Option<agilab::axioms::AxiomReport>| r.as_ref().map(|r| r.verdict.to_string()).unwrap_or_default();
        println!("{eta:>5} {:>8.4} {:>8.4} {:>6} {:>6}   via {}", c.tv, c.failure_mass, v(&c.pre_verdict), v(&c.post_verdict), c.witness_task);
    }
    Ok(())
}
