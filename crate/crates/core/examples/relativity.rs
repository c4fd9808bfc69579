//! The same agent passes breadth under one distribution and fails it under
//! another, at identical parameters.

use agilab::adversary::relativity_witness;
use agilab::agents::{make_agent, AgentSpec, Script};
use agilab::axioms::AxiomParams;
use agilab::ecologies::make_mdp_family;
use agilab::functionals::SamplingPlan;
use agilab::interaction::Budget;

fn main() -> agilab::Result<()> {
    let family = make_mdp_family(4, &[0.0, 0.25, 0.5, 0.75, 1.0])?;
    let agent = make_agent(&AgentSpec::scripted(Script::AlwaysForward), &[])?;
    let w = relativity_witness(&family, &agent, &Budget::ample(), &AxiomParams::default(), &SamplingPlan::exact(64), 1)?;
    println!("holds on {} (score {}): G1 {}", w.mu_hold.support()[0].id, w.good_score, w.hold_report.verdict);
    println!("fails on {} (score {}): G1 {}", w.mu_fail.support()[0].id, w.bad_score, w.fail_report.verdict);
    println!("theta_br = {}, delta_br = {}", w.axiom_params.thresholds.br, w.axiom_params.tails.br);
    Ok(())
}
