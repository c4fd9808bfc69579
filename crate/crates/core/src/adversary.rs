//! Constructive shifts: small-mass mixtures, fragility certificates,
//! prescribed-failure mixtures, worst-case and TV-constrained adversaries,
//! robustness counterexamples and relativity witnesses.

use serde::{Deserialize, Serialize};

use crate::axioms::{degradation_events, g1_with, AxiomId, AxiomParams, AxiomReport};
use crate::distances::tv_distance;
use crate::ecologies::{PerturbationOp, TaskDistribution, TaskFamily};
use crate::error::{Error, Result};
use crate::functionals::{failure_set_with, Evaluator, SamplingPlan, SCORE_TOL};
use crate::interaction::{AgentHandle, Budget, Task};
use crate::stats::{Interval, Verdict};

/// Family members examined when the support has no failing task.
pub const DEFAULT_SEARCH_CAP: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftCertificate {
    pub mu_prime: TaskDistribution,
    pub eta: f64,
    pub tv: f64,
    pub target_axiom: AxiomId,
    pub witness_task: String,
    /// μ′ mass on the failure set.
    pub failure_mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_verdict: Option<AxiomReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_verdict: Option<AxiomReport>,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativityWitness {
    pub mu_hold: TaskDistribution,
    pub mu_fail: TaskDistribution,
    pub axiom_params: AxiomParams,
    pub hold_report: AxiomReport,
    pub fail_report: AxiomReport,
    pub good_score: f64,
    pub bad_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCounterexample {
    pub perturbation: String,
    pub event_mass: f64,
    pub ci: Interval,
    pub witnesses: Vec<String>,
}

fn lowest<'a>(ev: &Evaluator, tasks: impl IntoIterator<Item = &'a Task>) -> Result<Option<(&'a Task, f64)>> {
    let mut best: Option<(&Task, f64)> = None;
    for t in tasks {
        let v = ev.eval(t)?.estimate.mean;
        let better = match best {
            None => true,
            Some((b, bv)) => v < bv - SCORE_TOL || ((v - bv).abs() <= SCORE_TOL && t.id < b.id),
        };
        if better {
            best = Some((t, v));
        }
    }
    Ok(best)
}

/// Picks τ_bad with Π̂ < θ: the worst support task if any fails, otherwise the
/// worst failing member of a bounded family sweep.
pub fn find_failing_task(
    ev: &Evaluator,
    mu: &TaskDistribution,
    theta: f64,
    search_cap: usize,
) -> Result<Option<Task>> {
    let f = failure_set_with(ev, mu, theta)?;
    if !f.members.is_empty() {
        let members = mu.support().iter().filter(|t| f.members.contains(&t.id));
        return Ok(lowest(ev, members)?.map(|(t, _)| t.clone()));
    }
    let candidates: Vec<Task> = mu
        .family()
        .enumerate(search_cap)
        .into_iter()
        .filter(|t| mu.weight_of(&t.id) == 0.0)
        .collect();
    ev.prefetch(&candidates.iter().collect::<Vec<_>>())?;
    let found = lowest(ev, &candidates)?;
    Ok(found.filter(|(_, v)| *v < theta - SCORE_TOL).map(|(t, _)| t.clone()))
}

fn shift_with(
    ev: &Evaluator,
    mu: &TaskDistribution,
    theta: f64,
    eta: f64,
) -> Result<Option<ShiftCertificate>> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Precondition(format!("eta {eta} outside (0,1)")));
    }
    let Some(bad) = find_failing_task(ev, mu, theta, DEFAULT_SEARCH_CAP)? else {
        return Ok(None);
    };
    let dirac = TaskDistribution::dirac(mu.family().clone(), bad.clone())?;
    let mu_prime = mu.mixture(&dirac, eta)?;
    let tv = tv_distance(mu, &mu_prime)?;
    let failure_mass = failure_set_with(ev, &mu_prime, theta)?.mu_mass;
    Ok(Some(ShiftCertificate {
        mu_prime,
        eta,
        tv,
        target_axiom: AxiomId::G1,
        witness_task: bad.id,
        failure_mass,
        pre_verdict: None,
        post_verdict: None,
        valid: failure_mass >= eta - SCORE_TOL,
    }))
}

/// μ′ = (1−η)μ + η·δ_{τ_bad} for some τ_bad with Π̂ < θ; `None` when no failing
/// task is found in the support or the searched family slice.
#[allow(clippy::too_many_arguments)]
pub fn small_mass_shift(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    budget: &Budget,
    theta: f64,
    eta: f64,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<Option<ShiftCertificate>> {
    shift_with(&Evaluator::new(agent, budget, plan, seed), mu, theta, eta)
}

/// Small-mass shift at θ_br with G1 decided before and after. Valid when G1
/// fails under μ′.
pub fn fragility_demo(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    budget: &Budget,
    params: &AxiomParams,
    eta: f64,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<ShiftCertificate> {
    let delta = params.tails.br;
    if !(eta > delta && eta < 1.0) {
        return Err(Error::Precondition(format!(
            "eta {eta} must lie in (delta_br, 1) = ({delta}, 1)"
        )));
    }
    let theta = params.thresholds.br;
    let ev = Evaluator::new(agent, budget, &plan.with_alpha(params.confidence_alpha), seed);
    let mut cert = shift_with(&ev, mu, theta, eta)?.ok_or(Error::EmptyFailureSet { theta })?;
    let pre = g1_with(&ev, mu, params)?;
    let post = g1_with(&ev, &cert.mu_prime, params)?;
    cert.valid = post.verdict == Verdict::Fail;
    cert.pre_verdict = Some(pre);
    cert.post_verdict = Some(post);
    Ok(cert)
}

/// μ′ = (1−ε/2)μ + (ε/2)ν with ν uniform on `cliff`.
pub fn prescribed_failure_shift(
    mu: &TaskDistribution,
    cliff: &[Task],
    epsilon: f64,
) -> Result<TaskDistribution> {
    if cliff.is_empty() {
        return Err(Error::Precondition("cliff set is empty".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Precondition(format!("epsilon {epsilon} outside (0,1)")));
    }
    let nu = TaskDistribution::uniform(mu.family().clone(), cliff.to_vec())?;
    mu.mixture(&nu, epsilon / 2.0)
}

/// inf_μ G_μ over distributions on `support`: the Dirac on the lowest-scoring
/// task (ties to the smallest id) and its estimate.
pub fn worst_case_distribution(
    family: &TaskFamily,
    support: &[Task],
    agent: &AgentHandle,
    budget: &Budget,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<(TaskDistribution, f64)> {
    let ev = Evaluator::new(agent, budget, plan, seed);
    worst_with(&ev, family, support)
}

fn worst_with(ev: &Evaluator, family: &TaskFamily, support: &[Task]) -> Result<(TaskDistribution, f64)> {
    ev.prefetch(&support.iter().collect::<Vec<_>>())?;
    let (t, v) = lowest(ev, support)?.ok_or(Error::EmptySupport)?;
    Ok((TaskDistribution::dirac(family.clone(), t.clone())?, v))
}

/// Minimizes G over {μ′ : d_TV(μ, μ′) ≤ η} on supp(μ): moves up to η mass,
/// highest-scoring tasks first, onto the lowest-scoring task.
pub fn tv_constrained_adversary(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    budget: &Budget,
    eta: f64,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<TaskDistribution> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Precondition(format!("eta {eta} outside [0,1]")));
    }
    let ev = Evaluator::new(agent, budget, plan, seed);
    ev.prefetch(&mu.support().iter().collect::<Vec<_>>())?;
    let (worst, _) = lowest(&ev, mu.support())?.ok_or(Error::EmptySupport)?;
    let mut order: Vec<(usize, f64)> = mu
        .support()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.id != worst.id)
        .map(|(i, t)| Ok((i, ev.eval(t)?.estimate.mean)))
        .collect::<Result<_>>()?;
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(mu.support()[a.0].id.cmp(&mu.support()[b.0].id)));
    let mut w = mu.weights().to_vec();
    let wi = mu.support().iter().position(|t| t.id == worst.id).unwrap();
    let mut budget_left = eta;
    for (i, _) in order {
        if budget_left <= 0.0 {
            break;
        }
        let take = w[i].min(budget_left);
        w[i] -= take;
        w[wi] += take;
        budget_left -= take;
    }
    let entries: Vec<(Task, f64)> = mu
        .support()
        .iter()
        .cloned()
        .zip(w)
        .filter(|(_, x)| *x > 0.0)
        .collect();
    TaskDistribution::from_weighted(mu.family().clone(), entries)
}

/// Searches `perturbations` for one whose degradation event has positive mass
/// with confidence (lower bound > 0); returns the one with the largest mass.
#[allow(clippy::too_many_arguments)]
pub fn robustness_counterexample(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    perturbations: &[PerturbationOp],
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<Option<RobustnessCounterexample>> {
    let ev = Evaluator::new(agent, budget, &plan.with_alpha(params.confidence_alpha), seed);
    let events = degradation_events(&ev, mu, perturbations, params.rb_slack)?;
    Ok(events
        .into_iter()
        .filter(|e| e.mass.lower > SCORE_TOL)
        .max_by(|a, b| a.mass.point.total_cmp(&b.mass.point))
        .map(|e| RobustnessCounterexample {
            perturbation: e.perturbation,
            event_mass: e.mass.point,
            ci: e.mass,
            witnesses: e.witnesses,
        }))
}

/// Finds τ_good, τ_bad in a family sweep with Π̂(τ_good) > θ_br > Π̂(τ_bad) and
/// returns the Dirac pair, each checked with G1. When the configured θ_br does
/// not separate the best and worst scores, it is moved to their midpoint.
pub fn relativity_witness(
    family: &TaskFamily,
    agent: &AgentHandle,
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<RelativityWitness> {
    let ev = Evaluator::new(agent, budget, &plan.with_alpha(params.confidence_alpha), seed);
    let tasks: Vec<Task> = family
        .enumerate(DEFAULT_SEARCH_CAP)
        .into_iter()
        .filter(|t| agent.agent().supports(t.interface()))
        .collect();
    ev.prefetch(&tasks.iter().collect::<Vec<_>>())?;
    let (bad, lo) = lowest(&ev, &tasks)?.ok_or(Error::EmptySupport)?;
    let mut good: Option<(&Task, f64)> = None;
    for t in &tasks {
        let v = ev.eval(t)?.estimate.mean;
        if good.is_none_or(|(g, gv)| v > gv + SCORE_TOL || ((v - gv).abs() <= SCORE_TOL && t.id < g.id)) {
            good = Some((t, v));
        }
    }
    let (good, hi) = good.unwrap();
    if hi - lo <= SCORE_TOL {
        return Err(Error::ConstantPerformance { value: hi });
    }
    let mut p = *params;
    if !(lo < p.thresholds.br && p.thresholds.br < hi) {
        p.thresholds.br = 0.5 * (lo + hi);
    }
    let mu_hold = TaskDistribution::dirac(family.clone(), good.clone())?;
    let mu_fail = TaskDistribution::dirac(family.clone(), bad.clone())?;
    let hold_report = g1_with(&ev, &mu_hold, &p)?;
    let fail_report = g1_with(&ev, &mu_fail, &p)?;
    Ok(RelativityWitness {
        mu_hold,
        mu_fail,
        axiom_params: p,
        hold_report,
        fail_report,
        good_score: hi,
        bad_score: lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{make_agent, AgentSpec, Script};
    use crate::ecologies::{chain_task, make_mdp_family};

    fn fwd() -> AgentHandle {
        make_agent(&AgentSpec::scripted(Script::AlwaysForward), &[]).unwrap()
    }

    fn chains(slips: &[f64], weights: &[f64]) -> TaskDistribution {
        let fam = make_mdp_family(3, slips).unwrap();
        let tasks = slips.iter().map(|s| chain_task(3, *s, None)).collect();
        TaskDistribution::new(fam, tasks, weights.to_vec()).unwrap()
    }

    #[test]
    fn tv_adversary_example() {
        let mu = chains(&[0.0, 1.0], &[0.5, 0.5]);
        let adv = tv_constrained_adversary(&mu, &fwd(), &Budget::ample(), 0.3, &SamplingPlan::exact(2), 0).unwrap();
        assert!((adv.weight_of(&chain_task(3, 0.0, None).id) - 0.2).abs() < 1e-12);
        assert!((adv.weight_of(&chain_task(3, 1.0, None).id) - 0.8).abs() < 1e-12);
        let full = tv_constrained_adversary(&mu, &fwd(), &Budget::ample(), 1.0, &SamplingPlan::exact(2), 0).unwrap();
        let (star, v) = worst_case_distribution(mu.family(), mu.support(), &fwd(), &Budget::ample(), &SamplingPlan::exact(2), 0).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(tv_distance(&full, &star).unwrap(), 0.0);
    }

    #[test]
    fn shift_on_dirac_of_bad_task_is_trivial() {
        let mu = chains(&[1.0], &[1.0]);
        let c = small_mass_shift(&mu, &fwd(), &Budget::ample(), 0.5, 0.5, &SamplingPlan::exact(2), 0)
            .unwrap()
            .unwrap();
        assert_eq!(c.tv, 0.0);
        assert_eq!(c.failure_mass, 1.0);
    }

    #[test]
    fn fragility_precondition() {
        let mu = chains(&[0.0, 1.0], &[0.95, 0.05]);
        let e = fragility_demo(&mu, &fwd(), &Budget::ample(), &AxiomParams::default(), 0.1, &SamplingPlan::exact(2), 0);
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn prescribed_shift_mass() {
        let mu = chains(&[0.0, 0.5], &[1.0, 0.0]);
        let cliff = vec![chain_task(3, 0.5, None)];
        let m = prescribed_failure_shift(&mu, &cliff, 0.2).unwrap();
        assert!((m.weight_of(&cliff[0].id) - 0.1).abs() < 1e-12);
        assert!(tv_distance(&mu, &m).unwrap() <= 0.1 + 1e-12);
        assert!(prescribed_failure_shift(&mu, &[], 0.2).is_err());
    }
}
