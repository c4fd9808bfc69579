use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::family::{GoalSpec, TaskFamily};
use crate::error::{Error, Result};
use crate::interaction::Task;
use crate::rng;

/// Tolerance on the total weight of a distribution.
pub const SUM_TOL: f64 = 1e-12;

/// Finite-support probability measure over tasks of one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDistribution {
    family: TaskFamily,
    support: Vec<Task>,
    weights: Vec<f64>,
}

impl TaskDistribution {
    pub fn new(family: TaskFamily, support: Vec<Task>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        if support.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} tasks but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("invalid weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let mut seen = BTreeSet::new();
        for t in &support {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::InvalidDistribution(format!("duplicate task `{}`", t.id)));
            }
            if !family.admissible(t) {
                return Err(Error::InvalidDistribution(format!(
                    "task `{}` is not a member of `{}`",
                    t.id, family.id
                )));
            }
        }
        Ok(TaskDistribution {
            family,
            support,
            weights,
        })
    }

    pub fn dirac(family: TaskFamily, task: Task) -> Result<Self> {
        Self::new(family, vec![task], vec![1.0])
    }

    pub fn uniform(family: TaskFamily, tasks: Vec<Task>) -> Result<Self> {
        let n = tasks.len();
        Self::new(family, tasks, vec![1.0 / n as f64; n])
    }

    /// Normalizes nonnegative weights, merging duplicate task ids.
    pub fn from_weighted(family: TaskFamily, entries: Vec<(Task, f64)>) -> Result<Self> {
        let total: f64 = entries.iter().map(|(_, w)| *w).sum();
        if entries.is_empty() || total <= 0.0 {
            return Err(Error::EmptySupport);
        }
        let mut order: Vec<Task> = Vec::new();
        let mut mass: BTreeMap<String, f64> = BTreeMap::new();
        for (t, w) in entries {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidDistribution(format!("invalid weight {w}")));
            }
            if !mass.contains_key(&t.id) {
                order.push(t.clone());
            }
            *mass.entry(t.id).or_insert(0.0) += w;
        }
        let weights = order.iter().map(|t| mass[&t.id] / total).collect();
        Self::new(family, order, weights)
    }

    /// Pushforward of a goal distribution through goal compilation.
    pub fn from_goals(family: TaskFamily, goals: &[(GoalSpec, f64)]) -> Result<Self> {
        let entries = goals
            .iter()
            .map(|(g, w)| family.compile(g).map(|t| (t, *w)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_weighted(family, entries)
    }

    pub fn family(&self) -> &TaskFamily {
        &self.family
    }

    pub fn support(&self) -> &[Task] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Task, f64)> {
        self.support.iter().zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn weight_of(&self, id: &str) -> f64 {
        self.iter()
            .filter(|(t, _)| t.id == id)
            .map(|(_, w)| w)
            .sum()
    }

    /// Total weight of the tasks whose ids are in `ids`.
    pub fn mass<'a, I: IntoIterator<Item = &'a str>>(&self, ids: I) -> f64 {
        let set: BTreeSet<&str> = ids.into_iter().collect();
        self.iter()
            .filter(|(t, _)| set.contains(t.id.as_str()))
            .map(|(_, w)| w)
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Task {
        &self.support[rng::sample_index(rng, &self.weights)]
    }

    /// `(1 - eta) * self + eta * other`, merged by task id. Tasks only in
    /// `other` are appended after `self`'s support.
    pub fn mixture(&self, other: &TaskDistribution, eta: f64) -> Result<Self> {
        if self.family.id != other.family.id {
            return Err(Error::FamilyMismatch(
                self.family.id.clone(),
                other.family.id.clone(),
            ));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Precondition(format!("mixture weight {eta} outside [0,1]")));
        }
        let mut support = self.support.clone();
        let mut weights: Vec<f64> = self.weights.iter().map(|w| (1.0 - eta) * w).collect();
        for (t, w) in other.iter() {
            match support.iter().position(|s| s.id == t.id) {
                Some(i) => weights[i] += eta * w,
                None => {
                    support.push(t.clone());
                    weights.push(eta * w);
                }
            }
        }
        // absorb rounding so that the sum invariant holds exactly enough
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        Self::new(self.family.clone(), support, weights)
    }
}

/// Sequence of task distributions over one family, indexed by time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSequence {
    pub steps: Vec<TaskDistribution>,
}

/// Linear interpolation of weights from `start` to `end` in `steps` steps
/// (endpoints included), each step renormalized.
pub fn make_drift(
    start: &TaskDistribution,
    end: &TaskDistribution,
    steps: usize,
) -> Result<DriftSequence> {
    if steps < 2 {
        return Err(Error::Precondition("a drift needs at least 2 steps".into()));
    }
    if start.family.id != end.family.id {
        return Err(Error::FamilyMismatch(
            start.family.id.clone(),
            end.family.id.clone(),
        ));
    }
    let a: BTreeSet<&str> = start.support.iter().map(|t| t.id.as_str()).collect();
    let b: BTreeSet<&str> = end.support.iter().map(|t| t.id.as_str()).collect();
    if a != b {
        return Err(Error::SupportMismatch(format!(
            "start has {} tasks, end has {}; supports must coincide",
            a.len(),
            b.len()
        )));
    }
    let end_w: Vec<f64> = start.support.iter().map(|t| end.weight_of(&t.id)).collect();
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let s = k as f64 / (steps - 1) as f64;
        let raw: Vec<f64> = start
            .weights
            .iter()
            .zip(&end_w)
            .map(|(w0, w1)| (1.0 - s) * w0 + s * w1)
            .collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.into_iter().map(|w| w / total).collect();
        out.push(TaskDistribution::new(
            start.family.clone(),
            start.support.clone(),
            weights,
        )?);
    }
    Ok(DriftSequence { steps: out })
}
