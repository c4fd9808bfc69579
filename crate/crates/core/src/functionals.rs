//! Distributional performance functionals: generality, its tail variant,
//! failure sets and regret, all built on a shared per-task estimate cache.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::oracle;
use crate::ecologies::TaskDistribution;
use crate::error::{Error, Result};
use crate::interaction::{rollouts, AgentHandle, Budget, Estimate, Task};
use crate::rng;
use crate::stats::{hoeffding_radius, EventMass, Interval, WEIGHT_TOL};

/// Comparison slack on per-task scores, so that values like 0.75 computed in
/// two different ways compare equal.
pub const SCORE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PlanMode {
    /// Weighted enumeration of the whole support.
    Exact,
    /// `n_tasks` i.i.d. draws from the distribution.
    MonteCarlo { n_tasks: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingPlan {
    pub mode: PlanMode,
    pub rollouts: usize,
    pub alpha: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            mode: PlanMode::Exact,
            rollouts: 32,
            alpha: 0.05,
        }
    }
}

impl SamplingPlan {
    pub fn exact(rollouts: usize) -> Self {
        SamplingPlan {
            rollouts,
            ..SamplingPlan::default()
        }
    }

    pub fn monte_carlo(n_tasks: usize, rollouts: usize) -> Self {
        SamplingPlan {
            mode: PlanMode::MonteCarlo { n_tasks },
            rollouts,
            ..SamplingPlan::default()
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn sampled(&self) -> Option<usize> {
        match self.mode {
            PlanMode::Exact => None,
            PlanMode::MonteCarlo { n_tasks } => Some(n_tasks),
        }
    }
}

/// Rollout summary for one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskEval {
    pub estimate: Estimate,
    pub scores: Vec<f64>,
    pub violations: Vec<bool>,
    /// Every rollout is the same episode.
    pub deterministic: bool,
}

impl TaskEval {
    pub fn frequency(&self, pred: impl Fn(f64, bool) -> bool, alpha: f64) -> Estimate {
        let n = self.scores.len();
        let hits = self
            .scores
            .iter()
            .zip(&self.violations)
            .filter(|(s, v)| pred(**s, **v))
            .count();
        Estimate {
            mean: hits as f64 / n as f64,
            half_width: if self.deterministic { 0.0 } else { hoeffding_radius(n, alpha) },
            rollouts: n,
        }
    }
}

/// Runs `plan.rollouts` episodes of `agent` on `task`.
pub fn evaluate_task(
    task: &Task,
    agent: &AgentHandle,
    budget: &Budget,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<TaskEval> {
    if plan.rollouts == 0 {
        return Err(Error::Precondition("plan.rollouts must be at least 1".into()));
    }
    let outcomes = rollouts(task, agent, budget, plan.rollouts, seed)?;
    let deterministic = task.is_deterministic() && agent.is_deterministic();
    let scores: Vec<f64> = outcomes.iter().map(|o| o.score).collect();
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(TaskEval {
        estimate: Estimate {
            mean,
            half_width: if deterministic { 0.0 } else { hoeffding_radius(scores.len(), plan.alpha) },
            rollouts: scores.len(),
        },
        violations: outcomes.iter().map(|o| o.violated).collect(),
        scores,
        deterministic,
    })
}

/// Per-task evaluator for one (agent snapshot, budget, plan, seed). Results
/// are cached by task id so every functional derived from the same evaluator
/// sees the same estimates.
#[derive(Debug)]
pub struct Evaluator {
    agent: AgentHandle,
    budget: Budget,
    plan: SamplingPlan,
    seed: u64,
    cache: Mutex<HashMap<String, Arc<TaskEval>>>,
}

impl Evaluator {
    pub fn new(agent: &AgentHandle, budget: &Budget, plan: &SamplingPlan, seed: u64) -> Self {
        Evaluator {
            agent: agent.clone(),
            budget: *budget,
            plan: *plan,
            seed,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn agent(&self) -> &AgentHandle {
        &self.agent
    }

    pub fn plan(&self) -> &SamplingPlan {
        &self.plan
    }

    pub fn eval(&self, task: &Task) -> Result<Arc<TaskEval>> {
        if let Some(hit) = self.cache.lock().unwrap().get(&task.id) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(evaluate_task(
            task,
            &self.agent,
            &self.budget,
            &self.plan,
            rng::derive_str(self.seed, &task.id),
        )?);
        Ok(self
            .cache
            .lock()
            .unwrap()
            .entry(task.id.clone())
            .or_insert(fresh)
            .clone())
    }

    /// Evaluates every distinct task, in parallel when the agent allows it.
    pub fn prefetch(&self, tasks: &[&Task]) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        let distinct: Vec<&Task> = tasks.iter().copied().filter(|t| seen.insert(&t.id)).collect();
        if self.agent.agent().parallel_safe() {
            distinct.par_iter().try_for_each(|t| self.eval(t).map(|_| ()))
        } else {
            distinct.iter().try_for_each(|t| self.eval(t).map(|_| ()))
        }
    }

    /// Scores the tasks `plan` draws from `mu`.
    pub fn draws(&self, mu: &TaskDistribution) -> Result<Draws> {
        let tasks = draw_tasks(mu, &self.plan, self.seed);
        let refs: Vec<&Task> = tasks.iter().map(|(t, _)| *t).collect();
        self.prefetch(&refs)?;
        let entries = tasks
            .into_iter()
            .map(|(t, w)| {
                Ok(Draw {
                    task: t.clone(),
                    weight: w,
                    eval: self.eval(t)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Draws {
            entries,
            sampled: self.plan.sampled(),
            alpha: self.plan.alpha,
        })
    }
}

/// Tasks selected by a plan, with the weight each carries in aggregates.
/// Exact mode returns the support; Monte Carlo mode returns i.i.d. draws
/// (with repetition) of weight `1/n` each.
pub fn draw_tasks<'a>(
    mu: &'a TaskDistribution,
    plan: &SamplingPlan,
    seed: u64,
) -> Vec<(&'a Task, f64)> {
    match plan.mode {
        PlanMode::Exact => mu.iter().collect(),
        PlanMode::MonteCarlo { n_tasks } => {
            let mut r = rng::rng(rng::derive_str(seed, "task-draws"));
            let w = 1.0 / n_tasks.max(1) as f64;
            (0..n_tasks).map(|_| (mu.sample(&mut r), w)).collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Draw {
    pub task: Task,
    pub weight: f64,
    pub eval: Arc<TaskEval>,
}

/// Weighted per-task evaluations, the common input of every aggregate.
#[derive(Debug, Clone)]
pub struct Draws {
    pub entries: Vec<Draw>,
    /// Number of Monte Carlo task draws, `None` for exact enumeration.
    pub sampled: Option<usize>,
    pub alpha: f64,
}

impl Draws {
    pub fn rollouts_used(&self) -> usize {
        self.entries.iter().map(|d| d.eval.estimate.rollouts).sum()
    }

    fn task_radius(&self) -> f64 {
        self.sampled.map_or(0.0, |n| hoeffding_radius(n, self.alpha))
    }

    /// Weighted mean of `f` over draws; the half-width adds the weighted
    /// per-task widths and, under sampling, the task-draw radius.
    pub fn mean_of(&self, f: impl Fn(&TaskEval) -> Estimate) -> Estimate {
        let (mut mean, mut hw, mut n) = (0.0, 0.0, 0);
        for d in &self.entries {
            let e = f(&d.eval);
            mean += d.weight * e.mean;
            hw += d.weight * e.half_width;
            n += e.rollouts;
        }
        Estimate {
            mean: mean.clamp(0.0, 1.0),
            half_width: hw + self.task_radius(),
            rollouts: n,
        }
    }

    pub fn mean(&self) -> Estimate {
        self.mean_of(|e| e.estimate)
    }

    /// Probability of a per-task event known through `(point, certain, possible)`.
    pub fn event(&self, f: impl Fn(&TaskEval) -> (bool, bool, bool)) -> Interval {
        let mut m = EventMass::default();
        for d in &self.entries {
            let (p, c, q) = f(&d.eval);
            m.add(d.weight, p, c, q);
        }
        match self.sampled {
            None => m.interval(),
            Some(n) => m.sampled(n, self.alpha),
        }
    }

    /// Probability that Π ≥ `theta`.
    pub fn at_least(&self, theta: f64) -> Interval {
        self.event(|e| {
            let t = theta - SCORE_TOL;
            (e.estimate.mean >= t, e.estimate.lower() >= t, e.estimate.upper() >= t)
        })
    }

    /// Ids of draws whose point estimate is below `theta`, deduplicated.
    pub fn below(&self, theta: f64) -> Vec<String> {
        let mut ids: Vec<String> = self
            .entries
            .iter()
            .filter(|d| d.eval.estimate.mean < theta - SCORE_TOL)
            .map(|d| d.task.id.clone())
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }
}

/// Difference of two generality means over the same draws. Under sampling the
/// per-task differences lie in [-1, 1], which doubles the task-draw radius.
pub fn paired_difference(a: &Draws, b: &Draws) -> Interval {
    let ea = Draws { sampled: None, ..a.clone() }.mean();
    let eb = Draws { sampled: None, ..b.clone() }.mean();
    let radius = a.sampled.map_or(0.0, |n| 2.0 * hoeffding_radius(n, a.alpha));
    let point = ea.mean - eb.mean;
    let hw = ea.half_width + eb.half_width + radius;
    Interval::around(point, hw, -1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralityEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub n_tasks_sampled: usize,
    /// Per-task estimate and rollout count.
    pub per_task: BTreeMap<String, (f64, usize)>,
}

impl GeneralityEstimate {
    fn from_draws(d: &Draws) -> Self {
        let e = d.mean();
        GeneralityEstimate {
            mean: e.mean,
            half_width: e.half_width,
            n_tasks_sampled: d.entries.len(),
            per_task: d
                .entries
                .iter()
                .map(|x| (x.task.id.clone(), (x.eval.estimate.mean, x.eval.estimate.rollouts)))
                .collect(),
        }
    }
}

/// G_μ(A;B) = E_{τ∼μ}[Π(τ,A;B)].
pub fn estimate_generality(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    budget: &Budget,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<GeneralityEstimate> {
    generality_with(&Evaluator::new(agent, budget, plan, seed), mu)
}

pub fn generality_with(ev: &Evaluator, mu: &TaskDistribution) -> Result<GeneralityEstimate> {
    if mu.is_empty() {
        return Err(Error::EmptySupport);
    }
    Ok(GeneralityEstimate::from_draws(&ev.draws(mu)?))
}

/// G_{μ,δ}: the largest per-task estimate θ with mass{Π̂ ≥ θ} ≥ 1 − δ.
pub fn estimate_tail_generality(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    budget: &Budget,
    delta: f64,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<f64> {
    tail_with(&Evaluator::new(agent, budget, plan, seed), mu, delta)
}

pub fn tail_with(ev: &Evaluator, mu: &TaskDistribution, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta {delta} outside (0,1)")));
    }
    if mu.is_empty() {
        return Err(Error::EmptySupport);
    }
    Ok(tail_quantile(&ev.draws(mu)?, delta))
}

/// Weighted upper order statistic over point estimates.
pub fn tail_quantile(draws: &Draws, delta: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = draws
        .entries
        .iter()
        .map(|d| (d.eval.estimate.mean, d.weight))
        .collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let need = 1.0 - delta - WEIGHT_TOL;
    let mut mass = 0.0;
    let mut i = 0;
    while i < pts.len() {
        let theta = pts[i].0;
        // absorb ties so that the mass is that of {Π̂ ≥ θ}
        while i < pts.len() && pts[i].0 >= theta - SCORE_TOL {
            mass += pts[i].1;
            i += 1;
        }
        if mass >= need {
            return theta;
        }
    }
    pts.last().map_or(0.0, |p| p.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSetReport {
    pub theta: f64,
    pub members: Vec<String>,
    pub mu_mass: f64,
}

/// F_θ ∩ supp(μ): support tasks whose point estimate is below θ.
pub fn failure_set(
    mu: &TaskDistribution,
    agent: &AgentHandle,
    budget: &Budget,
    theta: f64,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<FailureSetReport> {
    failure_set_with(&Evaluator::new(agent, budget, plan, seed), mu, theta)
}

pub fn failure_set_with(ev: &Evaluator, mu: &TaskDistribution, theta: f64) -> Result<FailureSetReport> {
    let tasks: Vec<&Task> = mu.support().iter().collect();
    ev.prefetch(&tasks)?;
    let mut members = Vec::new();
    let mut mu_mass = 0.0;
    for (t, w) in mu.iter() {
        if ev.eval(t)?.estimate.mean < theta - SCORE_TOL {
            members.push(t.id.clone());
            mu_mass += w;
        }
    }
    Ok(FailureSetReport {
        theta,
        members,
        mu_mass,
    })
}

/// Reg(τ,A;B) = Π̂(τ, oracle(τ); ample) − Π̂(τ, A; B), clamped to [0,1].
pub fn regret(
    task: &Task,
    agent: &AgentHandle,
    budget: &Budget,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<f64> {
    let best = evaluate_task(task, &oracle(task), &Budget::ample(), plan, seed)?;
    let got = evaluate_task(task, agent, budget, plan, seed)?;
    Ok((best.estimate.mean - got.estimate.mean).clamp(0.0, 1.0))
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
    fn weighted_generality() {
        let mu = chains(&[0.0, 1.0], &[0.8, 0.2]);
        let g = estimate_generality(&mu, &fwd(), &Budget::ample(), &SamplingPlan::exact(4), 0).unwrap();
        assert!((g.mean - 0.8).abs() < 1e-12);
        assert_eq!(g.half_width, 0.0);
    }

    #[test]
    fn tail_examples() {
        let mu = chains(&[0.0, 1.0], &[0.5, 0.5]);
        let b = Budget::ample();
        let p = SamplingPlan::exact(2);
        assert_eq!(estimate_tail_generality(&mu, &fwd(), &b, 0.6, &p, 0).unwrap(), 1.0);
        assert_eq!(estimate_tail_generality(&mu, &fwd(), &b, 0.4, &p, 0).unwrap(), 0.0);
    }

    #[test]
    fn failure_set_and_complement() {
        let mu = chains(&[0.0, 1.0], &[0.7, 0.3]);
        let ev = Evaluator::new(&fwd(), &Budget::ample(), &SamplingPlan::exact(2), 3);
        let f = failure_set_with(&ev, &mu, 0.5).unwrap();
        assert_eq!(f.members, vec![chain_task(3, 1.0, None).id]);
        let p = ev.draws(&mu).unwrap().at_least(0.5);
        assert!((p.point - (1.0 - f.mu_mass)).abs() < 1e-12);
        assert!(failure_set_with(&ev, &mu, 0.0).unwrap().members.is_empty());
    }

    #[test]
    fn regret_of_optimal_policy_is_zero() {
        let t = chain_task(2, 0.5, Some(2));
        let r = regret(&t, &fwd(), &Budget::ample(), &SamplingPlan::exact(64), 1).unwrap();
        assert_eq!(r, 0.0);
    }
}
