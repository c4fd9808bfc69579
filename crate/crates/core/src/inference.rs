//! Information-theoretic transfer bounds by exact enumeration, and the
//! two-point externality experiment.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axioms::{g1_with, AxiomParams, AxiomReport};
use crate::ecologies::TaskDistribution;
use crate::error::{Error, Result};
use crate::functionals::{Evaluator, SamplingPlan, SCORE_TOL};
use crate::interaction::{AgentHandle, Budget, Task};
use crate::rng;
use crate::stats::{hoeffding_radius, Verdict};

pub const MAX_ENUM_SUPPORT: usize = 5;
pub const MAX_ENUM_N: usize = 4;

/// Deterministic map from the pre-exposure multiset to an agent variant.
/// Variants are labeled by comma-joined task ids: the ids the variant
/// "has seen".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UpdateRule {
    /// Ignores the data.
    Constant,
    /// Remembers the set of distinct tasks.
    Memorize,
    /// Keeps only the most frequent task (ties to the smallest id).
    Majority,
    /// Remembers the whole multiset.
    Identity,
    /// Explicit lookup from multiset key (sorted, comma-joined ids) to variant.
    Table {
        map: BTreeMap<String, String>,
        #[serde(default)]
        default: String,
    },
}

impl UpdateRule {
    pub fn variant(&self, sorted: &[&str]) -> String {
        match self {
            UpdateRule::Constant => String::new(),
            UpdateRule::Memorize => {
                let mut d: Vec<&str> = sorted.to_vec();
                d.dedup();
                d.join(",")
            }
            UpdateRule::Majority => {
                let mut best: Option<(&str, usize)> = None;
                let mut i = 0;
                while i < sorted.len() {
                    let j = (i..sorted.len()).find(|&k| sorted[k] != sorted[i]).unwrap_or(sorted.len());
                    if best.is_none_or(|(_, c)| j - i > c) {
                        best = Some((sorted[i], j - i));
                    }
                    i = j;
                }
                best.map_or(String::new(), |(id, _)| id.to_string())
            }
            UpdateRule::Identity => sorted.join(","),
            UpdateRule::Table { map, default } => {
                map.get(&sorted.join(",")).cloned().unwrap_or_else(|| default.clone())
            }
        }
    }
}

/// Score of each agent variant on each task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScoreModel {
    /// `seen` on tasks named in the variant label, `unseen` elsewhere.
    SeenUnseen { seen: f64, unseen: f64 },
    Table {
        scores: BTreeMap<String, BTreeMap<String, f64>>,
        #[serde(default)]
        default: f64,
    },
}

impl ScoreModel {
    pub fn score(&self, variant: &str, task: &str) -> f64 {
        match self {
            ScoreModel::SeenUnseen { seen, unseen } => {
                if variant.split(',').any(|v| v == task) {
                    *seen
                } else {
                    *unseen
                }
            }
            ScoreModel::Table { scores, default } => scores
                .get(variant)
                .and_then(|m| m.get(task))
                .copied()
                .unwrap_or(*default),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationSetup {
    pub tasks: Vec<String>,
    pub n: usize,
    pub rule: UpdateRule,
    pub scores: ScoreModel,
}

/// One atom of the joint law of (D, A_D).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointAtom {
    pub dataset: Vec<String>,
    pub variant: String,
    pub prob: f64,
}

fn task_weights(setup: &EnumerationSetup, mu: &TaskDistribution) -> Result<Vec<(String, f64)>> {
    if setup.tasks.len() > MAX_ENUM_SUPPORT || setup.n > MAX_ENUM_N {
        return Err(Error::EnumerationLimit(format!(
            "support {} (max {MAX_ENUM_SUPPORT}), n {} (max {MAX_ENUM_N})",
            setup.tasks.len(),
            setup.n
        )));
    }
    if setup.n == 0 {
        return Err(Error::Precondition("pre-exposure size n must be at least 1".into()));
    }
    let mut out = Vec::new();
    for (t, w) in mu.iter() {
        if !setup.tasks.contains(&t.id) {
            return Err(Error::SupportMismatch(format!("`{}` is not a setup task", t.id)));
        }
        if w > 0.0 {
            out.push((t.id.clone(), w));
        }
    }
    if mu.len() > MAX_ENUM_SUPPORT {
        return Err(Error::EnumerationLimit(format!("support {}", mu.len())));
    }
    Ok(out)
}

/// Every dataset in supp(μ)^n with its probability and induced variant.
pub fn joint_law(setup: &EnumerationSetup, mu: &TaskDistribution) -> Result<Vec<JointAtom>> {
    let tw = task_weights(setup, mu)?;
    let k = tw.len();
    let mut out = Vec::with_capacity(k.pow(setup.n as u32));
    let mut idx = vec![0usize; setup.n];
    loop {
        let dataset: Vec<String> = idx.iter().map(|&i| tw[i].0.clone()).collect();
        let prob: f64 = idx.iter().map(|&i| tw[i].1).product();
        let mut sorted: Vec<&str> = dataset.iter().map(|s| s.as_str()).collect();
        sorted.sort();
        let variant = setup.rule.variant(&sorted);
        out.push(JointAtom {
            dataset,
            variant,
            prob,
        });
        // odometer increment
        let mut p = 0;
        loop {
            if p == setup.n {
                return Ok(out);
            }
            idx[p] += 1;
            if idx[p] < k {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

/// I(A_D; D) in nats, from the joint law Σ p(d,a) ln(p(d,a) / (p(d) p(a))).
pub fn exact_mutual_information(setup: &EnumerationSetup, mu: &TaskDistribution) -> Result<f64> {
    Ok(mi_of(&joint_law(setup, mu)?))
}

fn mi_of(joint: &[JointAtom]) -> f64 {
    let mut pa: BTreeMap<&str, f64> = BTreeMap::new();
    let mut pd: BTreeMap<&[String], f64> = BTreeMap::new();
    for j in joint {
        *pa.entry(&j.variant).or_default() += j.prob;
        *pd.entry(&j.dataset).or_default() += j.prob;
    }
    let mi: f64 = joint
        .iter()
        .filter(|j| j.prob > 0.0)
        .map(|j| j.prob * (j.prob / (pd[j.dataset.as_slice()] * pa[j.variant.as_str()])).ln())
        .sum();
    mi.max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferBoundReport {
    pub n: usize,
    pub mi_exact: f64,
    /// E[G_μ(A_D)]
    pub population: f64,
    /// E[Ĝ_D(A_D)]
    pub empirical: f64,
    pub gap: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub joint: Vec<JointAtom>,
}

/// |E[G_μ(A_D) − Ĝ_D(A_D)]| ≤ sqrt(2 I(A_D;D) / n), both sides exact.
pub fn transfer_bound_check(setup: &EnumerationSetup, mu: &TaskDistribution) -> Result<TransferBoundReport> {
    let joint = joint_law(setup, mu)?;
    let tw = task_weights(setup, mu)?;
    let mi = mi_of(&joint);
    let mut population = 0.0;
    let mut empirical = 0.0;
    for j in &joint {
        let g: f64 = tw.iter().map(|(t, w)| w * setup.scores.score(&j.variant, t)).sum();
        let ghat: f64 = j
            .dataset
            .iter()
            .map(|t| setup.scores.score(&j.variant, t))
            .sum::<f64>()
            / setup.n as f64;
        population += j.prob * g;
        empirical += j.prob * ghat;
    }
    let gap = population - empirical;
    let bound = (2.0 * mi / setup.n as f64).sqrt();
    Ok(TransferBoundReport {
        n: setup.n,
        mi_exact: mi,
        population,
        empirical,
        gap,
        bound,
        satisfied: gap.abs() <= bound + SCORE_TOL,
        joint,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetCoupling {
    /// Target task drawn independently of D.
    Independent,
    /// Target task is the first element of D.
    FirstOfDataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetBoundReport {
    pub coupling: TargetCoupling,
    pub mi_target_data: f64,
    /// E[Π(τ, A_D)] − E[Π(τ′, A_D)] with τ′ ∼ μ fresh.
    pub gap: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// |E[Π(τ, A_D)] − E[Π(τ′, A_D)]| ≤ sqrt(2 I(τ;D)), by enumeration.
pub fn lemma_c2_check(
    setup: &EnumerationSetup,
    mu: &TaskDistribution,
    coupling: TargetCoupling,
) -> Result<TargetBoundReport> {
    let joint = joint_law(setup, mu)?;
    let tw = task_weights(setup, mu)?;
    let fresh: f64 = joint
        .iter()
        .map(|j| j.prob * tw.iter().map(|(t, w)| w * setup.scores.score(&j.variant, t)).sum::<f64>())
        .sum();
    // joint law of (τ, D) as (task, dataset index, prob)
    let pairs: Vec<(&str, usize, f64)> = match coupling {
        TargetCoupling::Independent => joint
            .iter()
            .enumerate()
            .flat_map(|(k, j)| tw.iter().map(move |(t, w)| (t.as_str(), k, w * j.prob)))
            .collect(),
        TargetCoupling::FirstOfDataset => joint
            .iter()
            .enumerate()
            .map(|(k, j)| (j.dataset[0].as_str(), k, j.prob))
            .collect(),
    };
    let target: f64 = pairs
        .iter()
        .map(|(t, k, p)| p * setup.scores.score(&joint[*k].variant, t))
        .sum();
    let mut pt: BTreeMap<&str, f64> = BTreeMap::new();
    for (t, _, p) in &pairs {
        *pt.entry(t).or_default() += p;
    }
    let mi: f64 = pairs
        .iter()
        .filter(|(_, _, p)| *p > 0.0)
        .map(|(t, k, p)| p * (p / (pt[t] * joint[*k].prob)).ln())
        .sum::<f64>()
        .max(0.0);
    let gap = target - fresh;
    let bound = (2.0 * mi).sqrt();
    Ok(TargetBoundReport {
        coupling,
        mi_target_data: mi,
        gap,
        bound,
        satisfied: gap.abs() <= bound + SCORE_TOL,
    })
}

/// What an evaluator sees of one sampled task: its id and per-task estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observed {
    pub task_id: String,
    pub estimate: f64,
}

type RuleFn = dyn Fn(&[Observed], &AxiomParams) -> bool + Send + Sync;

/// Maps a sample Z_n to a declaration (true = "G1 holds").
#[derive(Clone)]
pub enum DecisionRule {
    /// Declare iff every sampled estimate is ≥ θ_br.
    AllPass,
    /// Declare iff the sample mean is ≥ 1 − δ_br.
    MeanThreshold,
    AlwaysDeclare,
    Custom { id: String, rule: Arc<RuleFn> },
}

impl fmt::Debug for DecisionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl DecisionRule {
    pub const BUILT_IN: [&'static str; 3] = ["all-pass", "mean-threshold", "always-declare"];

    pub fn built_in() -> Vec<DecisionRule> {
        vec![DecisionRule::AllPass, DecisionRule::MeanThreshold, DecisionRule::AlwaysDeclare]
    }

    pub fn by_name(name: &str) -> Option<DecisionRule> {
        match name {
            "all-pass" => Some(DecisionRule::AllPass),
            "mean-threshold" => Some(DecisionRule::MeanThreshold),
            "always-declare" => Some(DecisionRule::AlwaysDeclare),
            _ => None,
        }
    }

    pub fn custom(id: impl Into<String>, rule: impl Fn(&[Observed], &AxiomParams) -> bool + Send + Sync + 'static) -> Self {
        DecisionRule::Custom {
            id: id.into(),
            rule: Arc::new(rule),
        }
    }

    pub fn id(&self) -> String {
        match self {
            DecisionRule::AllPass => "all-pass".into(),
            DecisionRule::MeanThreshold => "mean-threshold".into(),
            DecisionRule::AlwaysDeclare => "always-declare".into(),
            DecisionRule::Custom { id, .. } => id.clone(),
        }
    }

    pub fn decide(&self, z: &[Observed], params: &AxiomParams) -> bool {
        match self {
            DecisionRule::AllPass => z
                .iter()
                .all(|o| o.estimate >= params.thresholds.br - SCORE_TOL),
            DecisionRule::MeanThreshold => {
                let m = z.iter().map(|o| o.estimate).sum::<f64>() / z.len().max(1) as f64;
                m >= 1.0 - params.tails.br - SCORE_TOL
            }
            DecisionRule::AlwaysDeclare => true,
            DecisionRule::Custom { rule, .. } => rule(z, params),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalityReport {
    pub epsilon: f64,
    pub n: usize,
    pub decision_rule_id: String,
    pub p0_declare: f64,
    pub p1_declare: f64,
    pub overlap_bound: f64,
    pub correct_sum: f64,
    pub ci_half_width: f64,
    /// p1 ≥ (1−ε)^n·p0 − 3·CI
    pub floor_holds: bool,
    /// correct_sum ≤ 1 + 3·CI
    pub ceiling_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalityResult {
    pub mu1: TaskDistribution,
    pub tau_bad: String,
    pub trials: usize,
    /// Fraction of μ₁ samples not containing τ_bad.
    pub absence_frequency: f64,
    pub absence_expected: f64,
    pub g1_mu0: AxiomReport,
    pub g1_mu1: AxiomReport,
    pub reports: Vec<ExternalityReport>,
}

#[derive(Debug, Clone)]
pub struct ExternalitySetup<'a> {
    pub mu0: &'a TaskDistribution,
    pub tau_bad: &'a Task,
    pub epsilon: f64,
    pub n: usize,
    pub trials: usize,
}

/// Runs each decision rule on `trials` samples of size n from μ₀ and from
/// μ₁ = (1−ε)μ₀ + ε·δ_{τ_bad}, after validating that G1 holds under μ₀ and
/// fails under μ₁.
#[allow(clippy::too_many_arguments)]
pub fn externality_experiment(
    setup: &ExternalitySetup<'_>,
    rules: &[DecisionRule],
    agent: &AgentHandle,
    budget: &Budget,
    params: &AxiomParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<ExternalityResult> {
    let ExternalitySetup { mu0, tau_bad, epsilon, n, trials } = *setup;
    if !(epsilon > params.tails.br && epsilon < 1.0) {
        return Err(Error::Precondition(format!(
            "epsilon {epsilon} must lie in (delta_br, 1)"
        )));
    }
    if n == 0 || trials == 0 {
        return Err(Error::Precondition("n and trials must be positive".into()));
    }
    if mu0.weight_of(&tau_bad.id) > 0.0 {
        return Err(Error::Precondition(format!("mu0 gives `{}` positive weight", tau_bad.id)));
    }
    let mu1 = mu0.mixture(&TaskDistribution::dirac(mu0.family().clone(), tau_bad.clone())?, epsilon)?;
    let ev = Evaluator::new(agent, budget, &plan.with_alpha(params.confidence_alpha), seed);
    let g0 = g1_with(&ev, mu0, params)?;
    let g1 = g1_with(&ev, &mu1, params)?;
    if g0.verdict != Verdict::Pass || g1.verdict != Verdict::Fail {
        return Err(Error::Precondition(format!(
            "two-point setup invalid: G1 is {} under mu0 and {} under mu1 (need pass, fail)",
            g0.verdict, g1.verdict
        )));
    }
    let est: BTreeMap<&str, f64> = mu1
        .support()
        .iter()
        .map(|t| Ok((t.id.as_str(), ev.eval(t)?.estimate.mean)))
        .collect::<Result<_>>()?;
    let s0 = rng::derive_str(seed, "mu0-trials");
    let s1 = rng::derive_str(seed, "mu1-trials");
    let sample = |mu: &TaskDistribution, s: u64| -> Vec<Observed> {
        let mut r = rng::rng(s);
        (0..n)
            .map(|_| {
                let t = mu.sample(&mut r);
                Observed {
                    task_id: t.id.clone(),
                    estimate: est[t.id.as_str()],
                }
            })
            .collect()
    };
    // per trial: declarations under μ₀, under μ₁, and whether τ_bad was absent
    let outcomes: Vec<(Vec<bool>, Vec<bool>, bool)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let z0 = sample(mu0, rng::derive(s0, t));
            let z1 = sample(&mu1, rng::derive(s1, t));
            let absent = z1.iter().all(|o| o.task_id != tau_bad.id);
            (
                rules.iter().map(|r| r.decide(&z0, params)).collect(),
                rules.iter().map(|r| r.decide(&z1, params)).collect(),
                absent,
            )
        })
        .collect();
    let tn = trials as f64;
    let ci = hoeffding_radius(trials, params.confidence_alpha);
    let overlap = (1.0 - epsilon).powi(n as i32);
    let reports = rules
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let p0 = outcomes.iter().filter(|o| o.0[k]).count() as f64 / tn;
            let p1 = outcomes.iter().filter(|o| o.1[k]).count() as f64 / tn;
            let correct_sum = p0 + (1.0 - p1);
            ExternalityReport {
                epsilon,
                n,
                decision_rule_id: r.id(),
                p0_declare: p0,
                p1_declare: p1,
                overlap_bound: overlap,
                correct_sum,
                ci_half_width: ci,
                floor_holds: p1 >= overlap * p0 - 3.0 * ci,
                ceiling_holds: correct_sum <= 1.0 + 3.0 * ci,
            }
        })
        .collect();
    Ok(ExternalityResult {
        tau_bad: tau_bad.id.clone(),
        trials,
        absence_frequency: outcomes.iter().filter(|o| o.2).count() as f64 / tn,
        absence_expected: overlap,
        g1_mu0: g0,
        g1_mu1: g1,
        reports,
        mu1,
    })
}
