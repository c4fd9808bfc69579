//! Experiment configuration, dispatch, and report persistence.
//!
//! A run is described by one TOML file ([`ExperimentConfig`]) and produces
//! one JSON document ([`RunReport`]). Numeric payloads depend only on the
//! config and seed; wall-clock timing is kept out of the payload.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adversary::{
    fragility_demo, relativity_witness, robustness_counterexample, tv_constrained_adversary,
    worst_case_distribution, RelativityWitness, RobustnessCounterexample, ShiftCertificate,
};
use crate::agents::{make_agent, AdaptationProtocol, AgentSpec, PreExposure};
use crate::axioms::{
    check_bundle, check_g5, check_weak_variants, g1_with, AxiomParams, AxiomReport, BundleInputs,
    BundleReport,
};
use crate::ecologies::{
    make_drift, make_perturbations, BudgetGrowth, GoalSpec, PerturbKind, PerturbationOp,
    TaskDistribution, TaskFamily,
};
use crate::error::{Error, Result};
use crate::functionals::{
    failure_set_with, generality_with, tail_with, Evaluator, FailureSetReport, GeneralityEstimate,
    SamplingPlan,
};
use crate::inference::{
    externality_experiment, lemma_c2_check, transfer_bound_check, DecisionRule, EnumerationSetup,
    ExternalityResult, ExternalitySetup, ScoreModel, TargetBoundReport, TargetCoupling,
    TransferBoundReport, UpdateRule,
};
use crate::interaction::{AgentHandle, Budget, Task};
use crate::stats::Verdict;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = concat!("agilab ", env!("CARGO_PKG_VERSION"));
/// Environment variable holding the default worker-thread count.
pub const PARALLELISM_ENV: &str = "AGILAB_PARALLELISM";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Evaluate,
    Axioms,
    Fragility,
    WorstCase,
    Robustness,
    Transfer,
    Externality,
    Relativity,
    Drift,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Evaluate,
        ExperimentKind::Axioms,
        ExperimentKind::Fragility,
        ExperimentKind::WorstCase,
        ExperimentKind::Robustness,
        ExperimentKind::Transfer,
        ExperimentKind::Externality,
        ExperimentKind::Relativity,
        ExperimentKind::Drift,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Evaluate => "evaluate",
            ExperimentKind::Axioms => "axioms",
            ExperimentKind::Fragility => "fragility",
            ExperimentKind::WorstCase => "worst-case",
            ExperimentKind::Robustness => "robustness",
            ExperimentKind::Transfer => "transfer",
            ExperimentKind::Externality => "externality",
            ExperimentKind::Relativity => "relativity",
            ExperimentKind::Drift => "drift",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config {
                path: "kind".into(),
                message: format!("unknown experiment kind `{s}`"),
            })
    }
}

/// Budget as written in a config; omitted components are ample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comp_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mem_cells: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episodes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_calls: Option<u64>,
}

impl BudgetSpec {
    pub fn resolve(&self) -> Budget {
        let a = Budget::ample();
        Budget {
            comp_steps: self.comp_steps.unwrap_or(a.comp_steps),
            mem_cells: self.mem_cells.unwrap_or(a.mem_cells),
            episodes: self.episodes.unwrap_or(a.episodes),
            interaction_steps: self.interaction_steps.unwrap_or(a.interaction_steps),
            tool_calls: self.tool_calls.unwrap_or(a.tool_calls),
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedGoal {
    pub goal: GoalSpec,
    #[serde(default = "one")]
    pub weight: f64,
}

/// Either explicit weighted goals or the uniform law on the first
/// `enumerate` family members.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tasks: Vec<WeightedGoal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumerate: Option<usize>,
}

impl DistributionSpec {
    pub fn build(&self, family: &TaskFamily, path: &str) -> Result<TaskDistribution> {
        let wrap = |e: Error| Error::Config {
            path: path.into(),
            message: e.to_string(),
        };
        match (&self.tasks[..], self.enumerate) {
            ([], None) => Err(Error::Config {
                path: path.into(),
                message: "give either `tasks` or `enumerate`".into(),
            }),
            ([], Some(k)) => TaskDistribution::uniform(family.clone(), family.enumerate(k)).map_err(wrap),
            (goals, _) => {
                let g: Vec<(GoalSpec, f64)> = goals.iter().map(|w| (w.goal.clone(), w.weight)).collect();
                TaskDistribution::from_goals(family.clone(), &g).map_err(wrap)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    /// Family-appropriate operators at this noise level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ops: Vec<PerturbKind>,
}

impl PerturbationSpec {
    pub fn build(&self, family: &TaskFamily) -> Vec<PerturbationOp> {
        let mut out = self.noise.map_or_else(Vec::new, |n| make_perturbations(family, n));
        out.extend(self.ops.iter().map(|k| match k {
            PerturbKind::Identity => PerturbationOp::identity(),
            PerturbKind::Paraphrase { key } => PerturbationOp::paraphrase(*key),
            PerturbKind::CharNoise { rate } => PerturbationOp::char_noise(*rate),
            PerturbKind::SlipIncrement { delta } => PerturbationOp::slip_increment(*delta),
        }));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptation: Option<AdaptationProtocol>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exposure: Option<PreExposure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbations: Option<PerturbationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goals: Option<Vec<WeightedGoal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_baseline: Option<AgentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g4_pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<BudgetGrowth>,
    #[serde(default)]
    pub weak_variants: bool,
}

fn default_etas() -> Vec<f64> {
    vec![0.15, 0.3, 0.6]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragilitySection {
    #[serde(default = "default_etas")]
    pub etas: Vec<f64>,
}

impl Default for FragilitySection {
    fn default() -> Self {
        FragilitySection { etas: default_etas() }
    }
}

fn default_adversary_etas() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorstCaseSection {
    /// TV radii for the constrained adversary.
    #[serde(default = "default_adversary_etas")]
    pub etas: Vec<f64>,
}

impl Default for WorstCaseSection {
    fn default() -> Self {
        WorstCaseSection {
            etas: default_adversary_etas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessSection {
    #[serde(default)]
    pub perturbations: PerturbationSpec,
    /// δ_rb values at which G5 is also decided; empty means the configured one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub delta_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferCase {
    pub n: usize,
    pub rule: UpdateRule,
    pub scores: ScoreModel,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSection {
    /// Enumeration cases over the distribution's support.
    #[serde(default)]
    pub cases: Vec<TransferCase>,
}

fn default_rules() -> Vec<String> {
    DecisionRule::BUILT_IN.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalitySection {
    pub epsilon: f64,
    pub n: usize,
    pub trials: usize,
    pub tau_bad: GoalSpec,
    #[serde(default = "default_rules")]
    pub rules: Vec<String>,
}

fn default_step_kind() -> ExperimentKind {
    ExperimentKind::Evaluate
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    pub end: DistributionSpec,
    pub steps: usize,
    /// Experiment run at each step.
    #[serde(default = "default_step_kind")]
    pub each: ExperimentKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub family: TaskFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    pub agent: AgentSpec,
    #[serde(default)]
    pub budget: BudgetSpec,
    #[serde(default)]
    pub params: AxiomParams,
    #[serde(default)]
    pub plan: SamplingPlan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axioms: Option<AxiomsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fragility: Option<FragilitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_case: Option<WorstCaseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robustness: Option<RobustnessSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub externality: Option<ExternalitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftSection>,
}

impl ExperimentConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Config {
            path: e.span().map_or("<document>".into(), |s| format!("bytes {}..{}", s.start, s.end)),
            message: e.message().to_string(),
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config {
            path: "<serialize>".into(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let src = std::fs::read_to_string(p)?;
        Self::from_toml_str(&src).map_err(|e| match e {
            Error::Config { path, message } => Error::Config {
                path: format!("{}: {path}", p.display()),
                message,
            },
            other => other,
        })
    }

    /// Checks cross-field constraints that the format cannot express.
    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| Error::Config {
            path: "params".into(),
            message: e.to_string(),
        })?;
        if self.plan.rollouts == 0 {
            return Err(Error::Config {
                path: "plan.rollouts".into(),
                message: "must be at least 1".into(),
            });
        }
        let needs_mu = !matches!(self.kind, ExperimentKind::Relativity);
        if needs_mu && self.distribution.is_none() {
            return Err(Error::Config {
                path: "distribution".into(),
                message: format!("required for `{}`", self.kind),
            });
        }
        let missing = |section: &str| Error::Config {
            path: section.into(),
            message: format!("section required for `{}`", self.kind),
        };
        match self.kind {
            ExperimentKind::Axioms if self.axioms.is_none() => Err(missing("axioms")),
            ExperimentKind::Externality if self.externality.is_none() => Err(missing("externality")),
            ExperimentKind::Drift if self.drift.is_none() => Err(missing("drift")),
            ExperimentKind::Transfer if self.transfer.is_none() => Err(missing("transfer")),
            _ => Ok(()),
        }
    }

    pub fn budget(&self) -> Budget {
        self.budget.resolve()
    }

    pub fn mu(&self) -> Result<TaskDistribution> {
        self.distribution
            .as_ref()
            .ok_or_else(|| Error::Config {
                path: "distribution".into(),
                message: "missing".into(),
            })?
            .build(&self.family, "distribution")
    }

    /// Tasks an oracle agent is bound to: the configured distributions, the
    /// externality τ_bad, and a sweep of the family.
    fn oracle_tasks(&self) -> Vec<Task> {
        let mut tasks = self.family.enumerate(256);
        if let Ok(mu) = self.mu() {
            tasks.extend(mu.support().iter().cloned());
        }
        if let Some(d) = &self.drift {
            if let Ok(end) = d.end.build(&self.family, "drift.end") {
                tasks.extend(end.support().iter().cloned());
            }
        }
        if let Some(x) = &self.externality {
            if let Ok(t) = self.family.compile(&x.tau_bad) {
                tasks.push(t);
            }
        }
        tasks
    }

    pub fn make_agent(&self, spec: &AgentSpec) -> Result<AgentHandle> {
        make_agent(spec, &self.oracle_tasks())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryPoint {
    pub eta: f64,
    pub distribution: TaskDistribution,
    pub generality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftStep {
    pub step: usize,
    pub distribution: TaskDistribution,
    pub results: Results,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Results {
    Evaluate {
        generality: GeneralityEstimate,
        tail_delta: f64,
        tail_generality: f64,
        failure_set: FailureSetReport,
        g1: AxiomReport,
    },
    Axioms {
        bundle: BundleReport,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weak_variants: Option<Vec<AxiomReport>>,
    },
    Fragility {
        certificates: Vec<ShiftCertificate>,
    },
    WorstCase {
        mu_star: TaskDistribution,
        value: f64,
        adversary: Vec<AdversaryPoint>,
    },
    Robustness {
        counterexample: Option<RobustnessCounterexample>,
        g5: Vec<AxiomReport>,
        delta_grid: Vec<f64>,
    },
    Transfer {
        bounds: Vec<TransferBoundReport>,
        targets: Vec<TargetBoundReport>,
    },
    Externality(ExternalityResult),
    Relativity(RelativityWitness),
    Drift {
        steps: Vec<DriftStep>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<TaskDistribution>,
    pub results: Results,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    /// Wall-clock milliseconds; not part of the numeric payload.
    pub timing_ms: u64,
}

impl RunReport {
    /// Everything except timing, serialized: byte-identical across reruns.
    pub fn payload(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("timing_ms");
        }
        serde_json::to_string(&v).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::Config {
            path: "<report>".into(),
            message: e.to_string(),
        })
    }

    /// Process exit code: 0 completed, 2 fail verdict, 3 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Some(Verdict::Fail) => EXIT_FAIL,
            Some(Verdict::Inconclusive) => EXIT_INCONCLUSIVE,
            _ => EXIT_OK,
        }
    }

    /// Flat CSV export of the results.
    pub fn to_csv(&self) -> Result<String> {
        let (header, rows) = self.results.table();
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&header).map_err(io)?;
        for r in rows {
            w.write_record(&r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    pub fn write(&self, path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
        let body = match format {
            OutputFormat::Report => self.to_json(),
            OutputFormat::Tabular => self.to_csv()?,
        };
        std::fs::write(path, body)?;
        Ok(())
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Report,
    Tabular,
}

fn f(x: f64) -> String {
    format!("{x}")
}

impl Results {
    pub fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let h = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match self {
            Results::Evaluate { generality, .. } => (
                h(&["task", "estimate", "rollouts"]),
                generality
                    .per_task
                    .iter()
                    .map(|(id, (e, n))| vec![id.clone(), f(*e), n.to_string()])
                    .collect(),
            ),
            Results::Axioms { bundle, weak_variants } => (
                h(&["axiom", "verdict", "estimate", "lower", "upper", "target", "samples"]),
                bundle
                    .reports
                    .iter()
                    .chain(weak_variants.iter().flatten())
                    .map(|r| {
                        vec![
                            r.axiom.to_string(),
                            r.verdict.to_string(),
                            f(r.estimate),
                            f(r.ci.lower),
                            f(r.ci.upper),
                            f(r.target),
                            r.samples_used.to_string(),
                        ]
                    })
                    .collect(),
            ),
            Results::Fragility { certificates } => (
                h(&["eta", "tv", "failure_mass", "witness", "pre", "post", "valid"]),
                certificates
                    .iter()
                    .map(|c| {
                        let v = |r: &Option<AxiomReport>| r.as_ref().map_or(String::new(), |r| r.verdict.to_string());
                        vec![
                            f(c.eta),
                            f(c.tv),
                            f(c.failure_mass),
                            c.witness_task.clone(),
                            v(&c.pre_verdict),
                            v(&c.post_verdict),
                            c.valid.to_string(),
                        ]
                    })
                    .collect(),
            ),
            Results::WorstCase { value, adversary, .. } => {
                let mut rows: Vec<Vec<String>> = adversary
                    .iter()
                    .map(|a| vec![f(a.eta), f(a.generality)])
                    .collect();
                rows.push(vec!["inf".into(), f(*value)]);
                (h(&["eta", "generality"]), rows)
            }
            Results::Robustness { g5, delta_grid, counterexample } => {
                let mass = counterexample.as_ref().map_or(0.0, |c| c.event_mass);
                (
                    h(&["delta_rb", "verdict", "event_mass"]),
                    delta_grid
                        .iter()
                        .zip(g5)
                        .map(|(d, r)| vec![f(*d), r.verdict.to_string(), f(mass)])
                        .collect(),
                )
            }
            Results::Transfer { bounds, .. } => (
                h(&["case", "n", "mi", "gap", "bound", "satisfied"]),
                bounds
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        vec![i.to_string(), b.n.to_string(), f(b.mi_exact), f(b.gap), f(b.bound), b.satisfied.to_string()]
                    })
                    .collect(),
            ),
            Results::Externality(x) => (
                h(&["rule", "p0_declare", "p1_declare", "overlap_bound", "correct_sum", "ci", "floor", "ceiling"]),
                x.reports
                    .iter()
                    .map(|r| {
                        vec![
                            r.decision_rule_id.clone(),
                            f(r.p0_declare),
                            f(r.p1_declare),
                            f(r.overlap_bound),
                            f(r.correct_sum),
                            f(r.ci_half_width),
                            r.floor_holds.to_string(),
                            r.ceiling_holds.to_string(),
                        ]
                    })
                    .collect(),
            ),
            Results::Relativity(w) => (
                h(&["role", "task", "score", "verdict"]),
                vec![
                    vec!["hold".into(), w.mu_hold.support()[0].id.clone(), f(w.good_score), w.hold_report.verdict.to_string()],
                    vec!["fail".into(), w.mu_fail.support()[0].id.clone(), f(w.bad_score), w.fail_report.verdict.to_string()],
                ],
            ),
            Results::Drift { steps } => (
                h(&["step", "verdict", "generality"]),
                steps
                    .iter()
                    .map(|s| {
                        let g = match &s.results {
                            Results::Evaluate { generality, .. } => f(generality.mean),
                            _ => String::new(),
                        };
                        vec![s.step.to_string(), s.verdict.map_or(String::new(), |v| v.to_string()), g]
                    })
                    .collect(),
            ),
        }
    }
}

fn run_on(cfg: &ExperimentConfig, kind: ExperimentKind, mu: Option<&TaskDistribution>) -> Result<(Results, Option<Verdict>)> {
    let budget = cfg.budget();
    let agent = cfg.make_agent(&cfg.agent)?;
    let params = &cfg.params;
    let plan = cfg.plan.with_alpha(params.confidence_alpha);
    let seed = cfg.seed;
    let mu = || mu.ok_or_else(|| Error::Config {
        path: "distribution".into(),
        message: "missing".into(),
    });
    Ok(match kind {
        ExperimentKind::Evaluate => {
            let mu = mu()?;
            let ev = Evaluator::new(&agent, &budget, &plan, seed);
            let g1 = g1_with(&ev, mu, params)?;
            let verdict = Some(g1.verdict);
            (
                Results::Evaluate {
                    generality: generality_with(&ev, mu)?,
                    tail_delta: params.tails.br,
                    tail_generality: tail_with(&ev, mu, params.tails.br)?,
                    failure_set: failure_set_with(&ev, mu, params.thresholds.br)?,
                    g1,
                },
                if kind == cfg.kind { None } else { verdict },
            )
        }
        ExperimentKind::Axioms => {
            let mu = mu()?;
            let sec = cfg.axioms.clone().unwrap_or_default();
            let mut inp = BundleInputs::new(budget, *params, plan);
            inp.adaptation = sec.adaptation;
            inp.exposure = sec.exposure;
            inp.perturbations = sec.perturbations.as_ref().map(|p| p.build(&cfg.family));
            inp.goals = sec
                .goals
                .as_ref()
                .map(|g| g.iter().map(|w| (w.goal.clone(), w.weight)).collect());
            inp.tool_baseline = sec.tool_baseline.as_ref().map(|s| cfg.make_agent(s)).transpose()?;
            if let Some(b) = sec.calibration_bins {
                inp.calibration_bins = b;
            }
            inp.g4_pairs = sec.g4_pairs;
            inp.growth = sec.growth.unwrap_or_default();
            let bundle = check_bundle(mu, &agent, &inp, seed)?;
            let weak = if sec.weak_variants {
                Some(check_weak_variants(mu, &agent, &inp, seed)?)
            } else {
                None
            };
            let v = bundle.overall;
            (Results::Axioms { bundle, weak_variants: weak }, Some(v))
        }
        ExperimentKind::Fragility => {
            let mu = mu()?;
            let etas = cfg.fragility.clone().unwrap_or_default().etas;
            let certificates = etas
                .iter()
                .map(|eta| fragility_demo(mu, &agent, &budget, params, *eta, &plan, seed))
                .collect::<Result<_>>()?;
            (Results::Fragility { certificates }, None)
        }
        ExperimentKind::WorstCase => {
            let mu = mu()?;
            let (mu_star, value) = worst_case_distribution(mu.family(), mu.support(), &agent, &budget, &plan, seed)?;
            let ev = Evaluator::new(&agent, &budget, &plan, seed);
            let adversary = cfg
                .worst_case
                .clone()
                .unwrap_or_default()
                .etas
                .iter()
                .map(|eta| {
                    let d = tv_constrained_adversary(mu, &agent, &budget, *eta, &plan, seed)?;
                    let g = generality_with(&ev, &d)?.mean;
                    Ok(AdversaryPoint {
                        eta: *eta,
                        distribution: d,
                        generality: g,
                    })
                })
                .collect::<Result<_>>()?;
            (Results::WorstCase { mu_star, value, adversary }, None)
        }
        ExperimentKind::Robustness => {
            let mu = mu()?;
            let sec = cfg.robustness.clone().unwrap_or_default();
            let ops = sec.perturbations.build(&cfg.family);
            let counterexample = robustness_counterexample(mu, &agent, &ops, &budget, params, &plan, seed)?;
            let grid = if sec.delta_grid.is_empty() {
                vec![params.tails.rb]
            } else {
                sec.delta_grid.clone()
            };
            let g5 = grid
                .iter()
                .map(|d| {
                    let mut p = *params;
                    p.tails.rb = *d;
                    check_g5(mu, &agent, &ops, &budget, &p, &plan, seed)
                })
                .collect::<Result<Vec<_>>>()?;
            (Results::Robustness { counterexample, g5, delta_grid: grid }, None)
        }
        ExperimentKind::Transfer => {
            let mu = mu()?;
            let ids: Vec<String> = mu.support().iter().map(|t| t.id.clone()).collect();
            let sec = cfg.transfer.clone().unwrap_or_default();
            let mut bounds = Vec::new();
            let mut targets = Vec::new();
            for c in &sec.cases {
                let setup = EnumerationSetup {
                    tasks: ids.clone(),
                    n: c.n,
                    rule: c.rule.clone(),
                    scores: c.scores.clone(),
                };
                bounds.push(transfer_bound_check(&setup, mu)?);
                for coupling in [TargetCoupling::Independent, TargetCoupling::FirstOfDataset] {
                    targets.push(lemma_c2_check(&setup, mu, coupling)?);
                }
            }
            (Results::Transfer { bounds, targets }, None)
        }
        ExperimentKind::Externality => {
            let mu0 = mu()?;
            let x = cfg.externality.as_ref().ok_or_else(|| Error::Config {
                path: "externality".into(),
                message: "missing".into(),
            })?;
            let tau_bad = cfg.family.compile(&x.tau_bad).map_err(|e| Error::Config {
                path: "externality.tau_bad".into(),
                message: e.to_string(),
            })?;
            let rules = x
                .rules
                .iter()
                .map(|r| {
                    DecisionRule::by_name(r).ok_or_else(|| Error::Config {
                        path: "externality.rules".into(),
                        message: format!("unknown rule `{r}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let setup = ExternalitySetup {
                mu0,
                tau_bad: &tau_bad,
                epsilon: x.epsilon,
                n: x.n,
                trials: x.trials,
            };
            let r = externality_experiment(&setup, &rules, &agent, &budget, params, &plan, seed)?;
            (Results::Externality(r), None)
        }
        ExperimentKind::Relativity => {
            let w = relativity_witness(&cfg.family, &agent, &budget, params, &plan, seed)?;
            (Results::Relativity(w), None)
        }
        ExperimentKind::Drift => {
            let steps = drift_steps(cfg)?;
            (Results::Drift { steps }, None)
        }
    })
}

fn drift_steps(cfg: &ExperimentConfig) -> Result<Vec<DriftStep>> {
    let d = cfg.drift.as_ref().ok_or_else(|| Error::Config {
        path: "drift".into(),
        message: "missing".into(),
    })?;
    if d.each == ExperimentKind::Drift {
        return Err(Error::Config {
            path: "drift.each".into(),
            message: "a drift step cannot itself be a drift".into(),
        });
    }
    let start = cfg.mu()?;
    let end = d.end.build(&cfg.family, "drift.end")?;
    let seq = make_drift(&start, &end, d.steps)?;
    seq.steps
        .into_iter()
        .enumerate()
        .map(|(i, mu)| {
            let (results, verdict) = run_on(cfg, d.each, Some(&mu))?;
            Ok(DriftStep {
                step: i,
                distribution: mu,
                results,
                verdict,
            })
        })
        .collect()
}

/// Runs the experiment `config.kind` describes.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let t0 = Instant::now();
    let mu = match config.kind {
        ExperimentKind::Relativity => None,
        _ => Some(config.mu()?),
    };
    let (results, verdict) = run_on(config, config.kind, mu.as_ref())?;
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        kind: config.kind,
        seed: config.seed,
        config: config.clone(),
        distribution: mu,
        results,
        verdict,
        timing_ms: t0.elapsed().as_millis() as u64,
    })
}

/// One report per drift step, each running `drift.each` on μ_t.
pub fn drift_sweep(config: &ExperimentConfig) -> Result<Vec<RunReport>> {
    let mut cfg = config.clone();
    cfg.kind = ExperimentKind::Drift;
    cfg.validate()?;
    let t0 = Instant::now();
    let steps = drift_steps(&cfg)?;
    let each = cfg.drift.as_ref().unwrap().each;
    Ok(steps
        .into_iter()
        .map(|s| RunReport {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.into(),
            kind: each,
            seed: cfg.seed,
            config: cfg.clone(),
            distribution: Some(s.distribution),
            results: s.results,
            verdict: s.verdict,
            timing_ms: t0.elapsed().as_millis() as u64,
        })
        .collect())
}

/// Worker-thread count: explicit value, else the environment variable, else
/// rayon's default.
pub fn parallelism(explicit: Option<usize>) -> Option<usize> {
    explicit.or_else(|| std::env::var(PARALLELISM_ENV).ok()?.parse().ok()).filter(|n| *n > 0)
}

/// Runs `f` inside a thread pool of the requested size.
pub fn with_parallelism<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Io(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Per-kind counts of numeric fields, handy for summaries.
pub fn summary(report: &RunReport) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("kind".into(), report.kind.to_string());
    m.insert("seed".into(), report.seed.to_string());
    if let Some(v) = report.verdict {
        m.insert("verdict".into(), v.to_string());
    }
    m
}
