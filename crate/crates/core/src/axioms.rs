//! Evidence-graded decision procedures for the axiom bundle G1–G5, A1–A4
//! and the weak variants G2′, G3′, G5′.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{adapt_within_task, pre_expose, AdaptationProtocol, PreExposure};
use crate::ecologies::{compose, BudgetGrowth, GoalSpec, PerturbationOp, TaskDistribution, TaskFamily};
use crate::error::{Error, Result};
use crate::functionals::{
    draw_tasks, evaluate_task, paired_difference, Draw, Draws, Evaluator, SamplingPlan, TaskEval,
    SCORE_TOL,
};
use crate::interaction::{AgentHandle, Budget, Task, TaskView};
use crate::rng;
use crate::stats::{decide_at_least, decide_at_most, hoeffding_radius, EventMass, Interval, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AxiomId {
    G1,
    G2,
    G3,
    G4,
    G5,
    A1,
    A2,
    A3,
    A4,
    #[serde(rename = "G2'")]
    G2Weak,
    #[serde(rename = "G3'")]
    G3Weak,
    #[serde(rename = "G5'")]
    G5Weak,
}

impl AxiomId {
    pub const BUNDLE: [AxiomId; 9] = [
        AxiomId::G1,
        AxiomId::G2,
        AxiomId::G3,
        AxiomId::G4,
        AxiomId::G5,
        AxiomId::A1,
        AxiomId::A2,
        AxiomId::A3,
        AxiomId::A4,
    ];
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AxiomId::G1 => "G1",
            AxiomId::G2 => "G2",
            AxiomId::G3 => "G3",
            AxiomId::G4 => "G4",
            AxiomId::G5 => "G5",
            AxiomId::A1 => "A1",
            AxiomId::A2 => "A2",
            AxiomId::A3 => "A3",
            AxiomId::A4 => "A4",
            AxiomId::G2Weak => "G2'",
            AxiomId::G3Weak => "G3'",
            AxiomId::G5Weak => "G5'",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub br: f64,
    pub ad: f64,
    pub tr: f64,
    pub cp: f64,
    pub rb: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            br: 0.5,
            ad: 0.5,
            tr: 0.05,
            cp: 0.5,
            rb: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tails {
    pub br: f64,
    pub ad: f64,
    pub tr: f64,
    pub cp: f64,
    pub rb: f64,
}

impl Default for Tails {
    fn default() -> Self {
        Tails {
            br: 0.1,
            ad: 0.1,
            tr: 0.1,
            cp: 0.1,
            rb: 0.1,
        }
    }
}

/// Constants parameterizing the bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AxiomParams {
    pub thresholds: Thresholds,
    pub tails: Tails,
    pub rb_slack: f64,
    pub cal_tol: f64,
    pub constraint_tol: f64,
    pub confidence_alpha: f64,
    /// Upper bound C on expected transfer gain (G3′).
    pub transfer_cap: f64,
    /// Calibration bins with fewer observations are skipped.
    pub min_bin_count: usize,
}

impl Default for AxiomParams {
    fn default() -> Self {
        AxiomParams {
            thresholds: Thresholds::default(),
            tails: Tails::default(),
            rb_slack: 0.1,
            cal_tol: 0.1,
            constraint_tol: 0.05,
            confidence_alpha: 0.05,
            transfer_cap: 1.0,
            min_bin_count: 10,
        }
    }
}

impl AxiomParams {
    pub fn validate(&self) -> Result<()> {
        let t = &self.thresholds;
        let d = &self.tails;
        for (name, v) in [("br", t.br), ("ad", t.ad), ("tr", t.tr), ("cp", t.cp), ("rb", t.rb)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Precondition(format!("theta_{name} = {v} outside [0,1]")));
            }
        }
        for (name, v) in [
            ("br", d.br),
            ("ad", d.ad),
            ("tr", d.tr),
            ("cp", d.cp),
            ("rb", d.rb),
            ("C", self.constraint_tol),
            ("alpha", self.confidence_alpha),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Precondition(format!("delta_{name} = {v} outside (0,1)")));
            }
        }
        if self.rb_slack < 0.0 || self.cal_tol < 0.0 || self.transfer_cap < 0.0 {
            return Err(Error::Precondition("slack parameters must be nonnegative".into()));
        }
        Ok(())
    }

    fn plan(&self, plan: &SamplingPlan) -> SamplingPlan {
        plan.with_alpha(self.confidence_alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: AxiomId,
    pub verdict: Verdict,
    pub estimate: f64,
    pub ci: Interval,
    /// Right-hand side of the inequality being decided.
    pub target: f64,
    pub witnesses: Vec<String>,
    pub samples_used: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl AxiomReport {
    fn new(axiom: AxiomId, verdict: Verdict, ci: Interval, target: f64) -> Self {
        AxiomReport {
            axiom,
            verdict,
            estimate: ci.point,
            ci,
            target,
            witnesses: Vec::new(),
            samples_used: 0,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn witnesses(mut self, w: Vec<String>) -> Self {
        self.witnesses = w;
        self
    }

    fn samples(mut self, n: usize) -> Self {
        self.samples_used = n;
        self
    }
}

fn at_least(axiom: AxiomId, ci: Interval, target: f64) -> AxiomReport {
    AxiomReport::new(axiom, decide_at_least(ci.lower, ci.upper, target), ci, target)
}

fn at_most(axiom: AxiomId, ci: Interval, target: f64) -> AxiomReport {
    AxiomReport::new(axiom, decide_at_most(ci.lower, ci.upper, target), ci, target)
}

fn breadth(axiom: AxiomId, draws: &Draws, theta: f64, delta: f64) -> AxiomReport {
    at_least(axiom, draws.at_least(theta), 1.0 - delta)
        .witnesses(draws.below(theta))
        .samples(draws.rollouts_used())
}

/// Scores each drawn task with `f`, in parallel when `parallel` holds.
fn score_draws(
    mu: &TaskDistribution,
    plan: &SamplingPlan,
    seed: u64,
    parallel: bool,
    f: impl Fn(&Task) -> Result<TaskEval> + Sync,
) -> Result<Draws> {
    let tasks = draw_tasks(mu, plan, seed);
    let mut distinct: Vec<&Task> = Vec::new();
    for (t, _) in &tasks {
        if !distinct.iter().any(|d| d.id == t.id) {
            distinct.push(t);
        }
    }
    let evals: Vec<TaskEval> = if parallel {
        distinct.par_iter().map(|t| f(t)).collect::<Result<_>>()?
    } else {
        distinct.iter().map(|t| f(t)).collect::<Result<_>>()?
    };
    let by_id: BTreeMap<&str, std::sync::Arc<TaskEval>> = distinct
        .iter()
        .zip(evals)
        .map(|(t, e)| (t.id.as_str(), std::sync::Arc::new(e)))
        .collect();
    Ok(Draws {
        entries: tasks
            .iter()
            .map(|(t, w)| Draw {
                task: (*t).clone(),
                weight: *w,
                eval: by_id[t.id.as_str()].clone(),
            })
            .collect(),
        sampled: plan.sampled(),
        alpha: plan.alpha,
    })
}

/// G1: P_{τ∼μ}(Π ≥ θ_br) ≥ 1 − δ_br.
pub fn check_g1(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    g1_with(&Evaluator::new(agent, budget, &params.plan(plan), seed), mu, params)
}

pub fn g1_with(ev: &Evaluator, mu: &TaskDistribution, params: &AxiomParams) -> Result<AxiomReport> {
    let d = ev.draws(mu)?;
    Ok(breadth(AxiomId::G1, &d, params.thresholds.br, params.tails.br))
}

fn adapted_draws(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    protocol: &AdaptationProtocol,
    budget: &Budget,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<Draws> {
    let adapt_seed = rng::derive_str(seed, "adapt");
    score_draws(mu, plan, seed, agent.agent().parallel_safe(), |t| {
        let adapted = adapt_within_task(agent, t, protocol, budget, rng::derive_str(adapt_seed, &t.id))?;
        evaluate_task(t, &adapted, budget, plan, rng::derive_str(seed, &t.id))
    })
}

/// G2: P_{τ∼μ}(Π(τ, A^{(N_ad)}) ≥ θ_ad) ≥ 1 − δ_ad, adapting separately on
/// every drawn task.
pub fn check_g2(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    protocol: &AdaptationProtocol,
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    let plan = params.plan(plan);
    let d = adapted_draws(mu, agent, protocol, budget, &plan, seed)?;
    let mut r = breadth(AxiomId::G2, &d, params.thresholds.ad, params.tails.ad);
    r.details.insert("n_ad".into(), protocol.within_task_updates as f64);
    Ok(r)
}

/// G2′: the mean improvement from adaptation is nonnegative.
pub fn check_g2_weak(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    protocol: &AdaptationProtocol,
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    let plan = params.plan(plan);
    let adapted = adapted_draws(mu, agent, protocol, budget, &plan, seed)?;
    let base = Evaluator::new(agent, budget, &plan, seed).draws(mu)?;
    let diff = paired_difference(&adapted, &base);
    Ok(at_least(AxiomId::G2Weak, diff, 0.0)
        .samples(adapted.rollouts_used() + base.rollouts_used()))
}

struct Transfer {
    pre: Draws,
    scratch: Draws,
    drawn: Vec<String>,
}

fn transfer_draws(
    mu: &TaskDistribution,
    scratch: &AgentHandle,
    exposure: &PreExposure,
    budget: &Budget,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<Transfer> {
    let pre = pre_expose(scratch, mu, exposure, budget)?;
    let eval_seed = rng::derive_str(seed, "fresh");
    Ok(Transfer {
        pre: Evaluator::new(&pre.agent, budget, plan, eval_seed).draws(mu)?,
        scratch: Evaluator::new(scratch, budget, plan, eval_seed).draws(mu)?,
        drawn: pre.drawn,
    })
}

fn external_caveat(agent: &AgentHandle, r: &mut AxiomReport) {
    if agent.kind() == "stdio-bridge" {
        r.notes.push(
            "external agent: the scratch baseline is supplied as-is and cannot be verified to share the pre-exposed agent's architecture"
                .into(),
        );
    }
}

/// G3: E[Π(τ, A_pre)] ≥ E[Π(τ, A_scratch)] + θ_tr.
pub fn check_g3(
    mu: &TaskDistribution,
    scratch: &AgentHandle,
    exposure: &PreExposure,
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    let plan = params.plan(plan);
    let t = transfer_draws(mu, scratch, exposure, budget, &plan, seed)?;
    let diff = paired_difference(&t.pre, &t.scratch);
    let no_gain = t
        .pre
        .entries
        .iter()
        .zip(&t.scratch.entries)
        .filter(|(a, b)| a.eval.estimate.mean <= b.eval.estimate.mean + SCORE_TOL)
        .map(|(a, _)| a.task.id.clone());
    let mut w: Vec<String> = no_gain.collect();
    w.dedup();
    let mut r = at_least(AxiomId::G3, diff, params.thresholds.tr)
        .witnesses(w)
        .samples(t.pre.rollouts_used() + t.scratch.rollouts_used());
    r.details.insert("k_tr".into(), exposure.n_tasks as f64);
    r.details.insert("distinct_exposed".into(), {
        let mut d = t.drawn.clone();
        d.sort();
        d.dedup();
        d.len() as f64
    });
    external_caveat(scratch, &mut r);
    Ok(r)
}

/// G3′: E[Π(τ, A_pre) − Π(τ, A_scratch)] ≤ C.
pub fn check_g3_weak(
    mu: &TaskDistribution,
    scratch: &AgentHandle,
    exposure: &PreExposure,
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    let plan = params.plan(plan);
    let t = transfer_draws(mu, scratch, exposure, budget, &plan, seed)?;
    let diff = paired_difference(&t.pre, &t.scratch);
    let mut r = at_most(AxiomId::G3Weak, diff, params.transfer_cap)
        .samples(t.pre.rollouts_used() + t.scratch.rollouts_used());
    external_caveat(scratch, &mut r);
    Ok(r)
}

/// G4: over independent pairs, P(both singles ≥ θ_cp ∧ composition < θ_cp)
/// ≤ δ_cp. With `n_pairs = None` every support pair is enumerated with
/// weight w_i·w_j; otherwise `n_pairs` pairs are drawn.
#[allow(clippy::too_many_arguments)]
pub fn check_g4(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    budget: &Budget,
    params: &AxiomParams,
    growth: BudgetGrowth,
    n_pairs: Option<usize>,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    let plan = params.plan(plan);
    let singles = Evaluator::new(agent, budget, &plan, seed);
    g4_with(&singles, mu, budget, params, growth, n_pairs, seed)
}

fn g4_with(
    singles: &Evaluator,
    mu: &TaskDistribution,
    budget: &Budget,
    params: &AxiomParams,
    growth: BudgetGrowth,
    n_pairs: Option<usize>,
    seed: u64,
) -> Result<AxiomReport> {
    let plan = *singles.plan();
    let composed = Evaluator::new(singles.agent(), &growth.apply(budget), &plan, rng::derive_str(seed, "composed"));
    let support = mu.support();
    let w = mu.weights();
    let pairs: Vec<(usize, usize, f64)> = match n_pairs {
        None => (0..support.len())
            .flat_map(|i| (0..support.len()).map(move |j| (i, j, w[i] * w[j])))
            .collect(),
        Some(n) => {
            let mut r = rng::rng(rng::derive_str(seed, "pairs"));
            (0..n)
                .map(|_| (rng::sample_index(&mut r, w), rng::sample_index(&mut r, w), 1.0 / n as f64))
                .collect()
        }
    };
    let tasks: Vec<Task> = pairs
        .iter()
        .map(|&(i, j, _)| compose(&support[i], &support[j], growth))
        .collect::<Result<_>>()?;
    singles.prefetch(&support.iter().collect::<Vec<_>>())?;
    composed.prefetch(&tasks.iter().collect::<Vec<_>>())?;
    let theta = params.thresholds.cp - SCORE_TOL;
    let mut mass = EventMass::default();
    let mut witnesses = Vec::new();
    let mut samples = 0;
    for (&(i, j, wt), t) in pairs.iter().zip(&tasks) {
        let a = singles.eval(&support[i])?.estimate;
        let b = singles.eval(&support[j])?.estimate;
        let c = composed.eval(t)?.estimate;
        samples += c.rollouts;
        let point = a.mean >= theta && b.mean >= theta && c.mean < theta;
        let certain = a.lower() >= theta && b.lower() >= theta && c.upper() < theta;
        let possible = a.upper() >= theta && b.upper() >= theta && c.lower() < theta;
        mass.add(wt, point, certain, possible);
        if point && !witnesses.contains(&t.id) {
            witnesses.push(t.id.clone());
        }
    }
    let ci = match n_pairs {
        None => mass.interval(),
        Some(n) => mass.sampled(n, plan.alpha),
    };
    let mut r = at_most(AxiomId::G4, ci, params.tails.cp)
        .witnesses(witnesses)
        .samples(samples);
    r.details.insert("pairs".into(), pairs.len() as f64);
    Ok(r)
}

/// Mass of the degradation event {Π(Δ(τ)) < Π(τ) − ε_rb} for one perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationEvent {
    pub perturbation: String,
    pub mass: Interval,
    pub witnesses: Vec<String>,
    pub samples: usize,
}

pub fn degradation_events(
    ev: &Evaluator,
    mu: &TaskDistribution,
    perturbations: &[PerturbationOp],
    slack: f64,
) -> Result<Vec<DegradationEvent>> {
    if let Some(op) = perturbations.iter().find(|p| !p.closed) {
        return Err(Error::OpenPerturbation(op.id.clone()));
    }
    let base = ev.draws(mu)?;
    let mut out = Vec::new();
    for op in perturbations {
        let moved: Vec<Task> = base.entries.iter().map(|d| op.apply(&d.task)).collect();
        ev.prefetch(&moved.iter().collect::<Vec<_>>())?;
        let mut mass = EventMass::default();
        let mut witnesses = Vec::new();
        let mut samples = 0;
        for (d, t) in base.entries.iter().zip(&moved) {
            let b = d.eval.estimate;
            let p = ev.eval(t)?.estimate;
            samples += b.rollouts + p.rollouts;
            let point = p.mean < b.mean - slack - SCORE_TOL;
            let certain = p.upper() < b.lower() - slack - SCORE_TOL;
            let possible = p.lower() < b.upper() - slack - SCORE_TOL;
            mass.add(d.weight, point, certain, possible);
            if point && !witnesses.contains(&d.task.id) {
                witnesses.push(d.task.id.clone());
            }
        }
        out.push(DegradationEvent {
            perturbation: op.id.clone(),
            mass: match base.sampled {
                None => mass.interval(),
                Some(n) => mass.sampled(n, base.alpha),
            },
            witnesses,
            samples,
        });
    }
    Ok(out)
}

fn robustness(
    axiom: AxiomId,
    ev: &Evaluator,
    mu: &TaskDistribution,
    perturbations: &[PerturbationOp],
    params: &AxiomParams,
) -> Result<AxiomReport> {
    let events = degradation_events(ev, mu, perturbations, params.rb_slack)?;
    let target = params.tails.rb;
    let verdicts: Vec<Verdict> = events
        .iter()
        .map(|e| decide_at_most(e.mass.lower, e.mass.upper, target))
        .collect();
    let Some(worst) = events
        .iter()
        .zip(&verdicts)
        .max_by(|(a, va), (b, vb)| {
            let rank = |v: &Verdict| match v {
                Verdict::Fail => 2,
                Verdict::Inconclusive => 1,
                Verdict::Pass => 0,
            };
            rank(va)
                .cmp(&rank(vb))
                .then(a.mass.point.total_cmp(&b.mass.point))
        })
        .map(|(e, _)| e)
    else {
        let mut r = AxiomReport::new(axiom, Verdict::Pass, Interval::exact(0.0), target);
        r.notes.push("no perturbations in scope; holds vacuously".into());
        return Ok(r);
    };
    let mut r = AxiomReport::new(axiom, Verdict::all(verdicts), worst.mass, target)
        .witnesses(worst.witnesses.clone())
        .samples(events.iter().map(|e| e.samples).sum());
    for e in &events {
        r.details.insert(format!("event_mass[{}]", e.perturbation), e.mass.point);
    }
    r.notes.push(format!("worst perturbation: {}", worst.perturbation));
    Ok(r)
}

/// G5: for every Δ, P(Π(Δ(τ)) ≥ Π(τ) − ε_rb) ≥ 1 − δ_rb, decided as an upper
/// bound δ_rb on the degradation-event mass. The worst Δ is reported.
pub fn check_g5(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    perturbations: &[PerturbationOp],
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    let ev = Evaluator::new(agent, budget, &params.plan(plan), seed);
    robustness(AxiomId::G5, &ev, mu, perturbations, params)
}

/// G5′: G5 restricted to marginal-preserving perturbations.
pub fn check_g5_weak(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    perturbations: &[PerturbationOp],
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    let ev = Evaluator::new(agent, budget, &params.plan(plan), seed);
    g5_weak_with(&ev, mu, perturbations, params)
}

fn g5_weak_with(
    ev: &Evaluator,
    mu: &TaskDistribution,
    perturbations: &[PerturbationOp],
    params: &AxiomParams,
) -> Result<AxiomReport> {
    let kept: Vec<PerturbationOp> = perturbations
        .iter()
        .filter(|p| p.marginal_preserving)
        .cloned()
        .collect();
    let mut r = robustness(AxiomId::G5Weak, ev, mu, &kept, params)?;
    let dropped = perturbations.len() - kept.len();
    if dropped > 0 {
        r.notes.push(format!("{dropped} perturbation(s) outside the marginal-preserving class skipped"));
    }
    Ok(r)
}

/// A1: G1's decision on the pushforward of the goal distribution `nu`.
#[allow(clippy::too_many_arguments)]
pub fn check_a1(
    nu: &[(GoalSpec, f64)],
    family: &TaskFamily,
    agent: &AgentHandle,
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    let mu = TaskDistribution::from_goals(family.clone(), nu)?;
    let ev = Evaluator::new(agent, budget, &params.plan(plan), seed);
    let d = ev.draws(&mu)?;
    Ok(breadth(AxiomId::A1, &d, params.thresholds.br, params.tails.br))
}

/// A2: E[Π(τ, A^M)] ≥ E[Π(τ, A)] + θ_tr.
#[allow(clippy::too_many_arguments)]
pub fn check_a2(
    mu: &TaskDistribution,
    with_tool: &AgentHandle,
    without: &AgentHandle,
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    let plan = params.plan(plan);
    let a = Evaluator::new(with_tool, budget, &plan, seed).draws(mu)?;
    let b = Evaluator::new(without, budget, &plan, seed).draws(mu)?;
    let diff = paired_difference(&a, &b);
    let mut r = at_least(AxiomId::A2, diff, params.thresholds.tr)
        .samples(a.rollouts_used() + b.rollouts_used());
    r.details.insert("with_tool".into(), a.mean().mean);
    r.details.insert("without_tool".into(), b.mean().mean);
    if budget.tool_calls == 0 {
        r.notes.push("tool budget is zero".into());
    }
    Ok(r)
}

/// A3: in every calibration bin with enough observations,
/// |P(success | c ∈ I) − E[c | c ∈ I]| ≤ ε_cal. Success is per episode:
/// score ≥ θ_br.
#[allow(clippy::too_many_arguments)]
pub fn check_a3(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    budget: &Budget,
    params: &AxiomParams,
    bins: usize,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    let ev = Evaluator::new(agent, budget, &params.plan(plan), seed);
    a3_with(&ev, mu, params, bins)
}

#[derive(Default)]
struct Bin {
    weight: f64,
    success: f64,
    confidence: f64,
    width: f64,
    observations: usize,
    draws: usize,
    tasks: Vec<String>,
}

fn a3_with(ev: &Evaluator, mu: &TaskDistribution, params: &AxiomParams, bins: usize) -> Result<AxiomReport> {
    let bins = bins.max(1);
    let d = ev.draws(mu)?;
    let alpha = d.alpha;
    let mut table: Vec<Bin> = (0..bins).map(|_| Bin::default()).collect();
    for e in &d.entries {
        let c = ev
            .agent()
            .confidence(&TaskView::of(&e.task))
            .ok_or(Error::NoConfidence)?;
        let b = &mut table[((c * bins as f64) as usize).min(bins - 1)];
        let s = e.eval.frequency(|score, _| score >= params.thresholds.br - SCORE_TOL, alpha);
        b.weight += e.weight;
        b.success += e.weight * s.mean;
        b.confidence += e.weight * c;
        b.width += e.weight * s.half_width;
        b.observations += s.rollouts;
        b.draws += 1;
        if !b.tasks.contains(&e.task.id) {
            b.tasks.push(e.task.id.clone());
        }
    }
    let mut verdicts = Vec::new();
    let mut worst: Option<(usize, Interval)> = None;
    let mut notes = Vec::new();
    let mut details = BTreeMap::new();
    for (k, b) in table.iter().enumerate() {
        if b.draws == 0 {
            continue;
        }
        if b.observations < params.min_bin_count {
            notes.push(format!("bin {k} skipped: {} observations", b.observations));
            continue;
        }
        let f = b.success / b.weight;
        let m = b.confidence / b.weight;
        let hw = match d.sampled {
            None => b.width / b.weight,
            Some(_) => hoeffding_radius(b.draws, alpha),
        };
        let gap = (f - m).abs();
        let ci = Interval {
            point: gap,
            lower: (gap - hw).max(0.0),
            upper: gap + hw,
        };
        details.insert(format!("gap[bin {k}]"), gap);
        verdicts.push(decide_at_most(ci.lower, ci.upper, params.cal_tol));
        if worst.is_none_or(|(_, w)| gap > w.point) {
            worst = Some((k, ci));
        }
    }
    let Some((k, ci)) = worst else {
        let mut r = AxiomReport::new(AxiomId::A3, Verdict::Inconclusive, Interval { point: 0.0, lower: 0.0, upper: 1.0 }, params.cal_tol);
        r.notes = notes;
        r.notes.push("no bin reached the minimum observation count".into());
        return Ok(r);
    };
    let mut r = AxiomReport::new(AxiomId::A3, Verdict::all(verdicts), ci, params.cal_tol)
        .witnesses(table[k].tasks.clone())
        .samples(d.rollouts_used());
    r.details = details;
    r.notes = notes;
    Ok(r)
}

/// A4: P(V_C = 1) ≤ δ_C and P(success ∧ V_C = 0) ≥ 1 − δ_br − δ_C, both per
/// episode.
pub fn check_a4(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<AxiomReport> {
    let ev = Evaluator::new(agent, budget, &params.plan(plan), seed);
    a4_with(&ev, mu, params)
}

fn a4_with(ev: &Evaluator, mu: &TaskDistribution, params: &AxiomParams) -> Result<AxiomReport> {
    if !mu.family().has_violation_predicate() {
        return Err(Error::NoViolationPredicate(mu.family().id.clone()));
    }
    let d = ev.draws(mu)?;
    let a = d.alpha;
    let theta = params.thresholds.br - SCORE_TOL;
    let v = d.mean_of(|e| e.frequency(|_, v| v, a));
    let j = d.mean_of(|e| e.frequency(|s, v| s >= theta && !v, a));
    let v_ci = Interval::around(v.mean, v.half_width, 0.0, 1.0);
    let j_ci = Interval::around(j.mean, j.half_width, 0.0, 1.0);
    let joint_target = 1.0 - params.tails.br - params.constraint_tol;
    let first = decide_at_most(v_ci.lower, v_ci.upper, params.constraint_tol);
    let second = decide_at_least(j_ci.lower, j_ci.upper, joint_target);
    let witnesses = {
        let mut w: Vec<String> = d
            .entries
            .iter()
            .filter(|e| e.eval.violations.iter().any(|x| *x))
            .map(|e| e.task.id.clone())
            .collect();
        w.sort();
        w.dedup();
        w
    };
    let mut r = AxiomReport::new(AxiomId::A4, Verdict::all([first, second]), v_ci, params.constraint_tol)
        .witnesses(witnesses)
        .samples(d.rollouts_used());
    r.details.insert("violation_rate".into(), v.mean);
    r.details.insert("joint_success".into(), j.mean);
    r.details.insert("joint_lower".into(), j_ci.lower);
    r.details.insert("joint_target".into(), joint_target);
    r.notes.push(format!("violation clause: {first}; joint clause: {second}"));
    Ok(r)
}

/// Auxiliary inputs the bundle needs beyond (μ, A).
#[derive(Debug, Clone)]
pub struct BundleInputs {
    pub budget: Budget,
    pub params: AxiomParams,
    pub plan: SamplingPlan,
    pub adaptation: Option<AdaptationProtocol>,
    pub exposure: Option<PreExposure>,
    pub perturbations: Option<Vec<PerturbationOp>>,
    pub goals: Option<Vec<(GoalSpec, f64)>>,
    /// Reference agent without tool access (A2).
    pub tool_baseline: Option<AgentHandle>,
    pub calibration_bins: usize,
    pub g4_pairs: Option<usize>,
    pub growth: BudgetGrowth,
}

impl BundleInputs {
    pub fn new(budget: Budget, params: AxiomParams, plan: SamplingPlan) -> Self {
        BundleInputs {
            budget,
            params,
            plan,
            adaptation: None,
            exposure: None,
            perturbations: None,
            goals: None,
            tool_baseline: None,
            calibration_bins: 10,
            g4_pairs: None,
            growth: BudgetGrowth::Sum,
        }
    }

    fn missing(&self, axiom: AxiomId) -> Option<&'static str> {
        match axiom {
            AxiomId::G2 | AxiomId::G2Weak if self.adaptation.is_none() => Some("adaptation protocol"),
            AxiomId::G3 | AxiomId::G3Weak if self.exposure.is_none() => Some("pre-exposure"),
            AxiomId::G5 | AxiomId::G5Weak if self.perturbations.is_none() => Some("perturbations"),
            AxiomId::A1 if self.goals.is_none() => Some("goal distribution"),
            AxiomId::A2 if self.tool_baseline.is_none() => Some("baseline agent without tools"),
            _ => None,
        }
    }

    fn require(&self, axioms: &[AxiomId]) -> Result<()> {
        for a in axioms {
            if let Some(what) = self.missing(*a) {
                return Err(Error::MissingInput {
                    axiom: a.to_string(),
                    what: what.into(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleReport {
    pub reports: Vec<AxiomReport>,
    pub overall: Verdict,
    pub params: AxiomParams,
    pub plan: SamplingPlan,
}

fn run_one(
    axiom: AxiomId,
    shared: &Evaluator,
    mu: &TaskDistribution,
    agent: &AgentHandle,
    inp: &BundleInputs,
    seed: u64,
) -> Result<AxiomReport> {
    let p = &inp.params;
    let plan = &inp.plan;
    let b = &inp.budget;
    let s = rng::derive_str(seed, &axiom.to_string());
    match axiom {
        AxiomId::G1 => g1_with(shared, mu, p),
        AxiomId::G2 => check_g2(mu, agent, inp.adaptation.as_ref().unwrap(), b, p, plan, s),
        AxiomId::G3 => check_g3(mu, agent, inp.exposure.as_ref().unwrap(), b, p, plan, s),
        AxiomId::G4 => g4_with(shared, mu, b, p, inp.growth, inp.g4_pairs, s),
        AxiomId::G5 => robustness(AxiomId::G5, shared, mu, inp.perturbations.as_deref().unwrap(), p),
        AxiomId::A1 => check_a1(inp.goals.as_deref().unwrap(), mu.family(), agent, b, p, plan, s),
        AxiomId::A2 => check_a2(mu, agent, inp.tool_baseline.as_ref().unwrap(), b, p, plan, s),
        AxiomId::A3 => a3_with(shared, mu, p, inp.calibration_bins),
        AxiomId::A4 => a4_with(shared, mu, p),
        AxiomId::G2Weak => check_g2_weak(mu, agent, inp.adaptation.as_ref().unwrap(), b, p, plan, s),
        AxiomId::G3Weak => check_g3_weak(mu, agent, inp.exposure.as_ref().unwrap(), b, p, plan, s),
        AxiomId::G5Weak => g5_weak_with(shared, mu, inp.perturbations.as_deref().unwrap(), p),
    }
}

fn run_all(
    axioms: &[AxiomId],
    mu: &TaskDistribution,
    agent: &AgentHandle,
    inp: &BundleInputs,
    seed: u64,
) -> Result<Vec<AxiomReport>> {
    inp.params.validate()?;
    inp.require(axioms)?;
    let shared = Evaluator::new(agent, &inp.budget, &inp.params.plan(&inp.plan), seed);
    if agent.agent().parallel_safe() {
        axioms
            .par_iter()
            .map(|a| run_one(*a, &shared, mu, agent, inp, seed))
            .collect()
    } else {
        axioms
            .iter()
            .map(|a| run_one(*a, &shared, mu, agent, inp, seed))
            .collect()
    }
}

/// Runs G1–G5 and A1–A4. Overall: fail if any fails, else inconclusive if
/// any is inconclusive, else pass.
pub fn check_bundle(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    inputs: &BundleInputs,
    seed: u64,
) -> Result<BundleReport> {
    let reports = run_all(&AxiomId::BUNDLE, mu, agent, inputs, seed)?;
    Ok(BundleReport {
        overall: Verdict::all(reports.iter().map(|r| r.verdict)),
        reports,
        params: inputs.params,
        plan: inputs.plan,
    })
}

/// Runs G2′, G3′ and G5′.
pub fn check_weak_variants(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    inputs: &BundleInputs,
    seed: u64,
) -> Result<Vec<AxiomReport>> {
    run_all(&[AxiomId::G2Weak, AxiomId::G3Weak, AxiomId::G5Weak], mu, agent, inputs, seed)
}
