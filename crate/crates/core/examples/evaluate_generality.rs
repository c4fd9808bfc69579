//! Generality, tail generality and the failure set of a forward-walker on
//! chains of varying slipperiness.

use agilab::ecologies::{make_mdp_family, GoalSpec, TaskDistribution};
use agilab::agents::{make_agent, AgentSpec, Script};
use agilab::functionals::{estimate_generality, estimate_tail_generality, failure_set, SamplingPlan};
use agilab::interaction::Budget;

fn main() -> agilab::Result<()> {
    let family = make_mdp_family(3, &[0.0, 0.5, 1.0])?;
    let chain = |slip| GoalSpec::Chain { slip, length: None, horizon: None };
    let mu = TaskDistribution::from_goals(family, &[(chain(0.0), 0.7), (chain(0.5), 0.2), (chain(1.0), 0.1)])?;
    let agent = make_agent(&AgentSpec::scripted(Script::AlwaysForward), &[])?;
    let budget = Budget::ample();
    let plan = SamplingPlan::exact(400);

    let g = estimate_generality(&mu, &agent, &budget, &plan, 7)?;
    println!("G_mu = {:.4} +/- {:.4}", g.mean, g.half_width);
    for (id, (est, n)) in &g.per_task {
        println!("  {id:<24} {est:.4} over {n} rollouts");
    }
    let tail = estimate_tail_generality(&mu, &agent, &budget, 0.1, &plan, 7)?;
    println!("tail generality at delta = 0.1: {tail:.4}");
    let f = failure_set(&mu, &agent, &budget, 0.5, &plan, 7)?;
    println!("failure set below {}: {:?} (mass {})", f.theta, f.members, f.mu_mass);
    Ok(())
}
