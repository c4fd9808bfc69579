use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::family::{compose, instruction_task, chain_task, BudgetGrowth, FamilyKind, TaskFamily};
use crate::interaction::{EnvSpec, InstructionEnv, Task};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PerturbKind {
    Identity,
    /// Bijective renaming of argument letters, keyed per task.
    Paraphrase { key: u64 },
    /// Per-character flip probability on the prompt argument.
    CharNoise { rate: f64 },
    /// Adds `delta` to the slip probability, clamped to 1.
    SlipIncrement { delta: f64 },
}

/// Task-to-task map used to probe robustness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationOp {
    pub id: String,
    pub kind: PerturbKind,
    /// Image stays in the family.
    pub closed: bool,
    /// Leaves the law of observations unchanged (up to relabeling).
    pub marginal_preserving: bool,
}

impl PerturbationOp {
    pub fn identity() -> Self {
        PerturbationOp {
            id: "identity".into(),
            kind: PerturbKind::Identity,
            closed: true,
            marginal_preserving: true,
        }
    }

    pub fn paraphrase(key: u64) -> Self {
        PerturbationOp {
            id: format!("paraphrase#{key}"),
            kind: PerturbKind::Paraphrase { key },
            closed: true,
            marginal_preserving: true,
        }
    }

    pub fn char_noise(rate: f64) -> Self {
        PerturbationOp {
            id: format!("char-noise({rate})"),
            kind: PerturbKind::CharNoise { rate },
            closed: true,
            marginal_preserving: rate == 0.0,
        }
    }

    pub fn slip_increment(delta: f64) -> Self {
        PerturbationOp {
            id: format!("slip+{delta}"),
            kind: PerturbKind::SlipIncrement { delta },
            closed: true,
            marginal_preserving: delta == 0.0,
        }
    }

    pub fn apply(&self, task: &Task) -> Task {
        match &task.env {
            EnvSpec::Composed { first, second } => {
                compose(&self.apply(first), &self.apply(second), BudgetGrowth::Sum)
                    .expect("perturbations preserve the interface")
            }
            EnvSpec::Instruction(e) => match &self.kind {
                PerturbKind::Paraphrase { key } => instruction_task(InstructionEnv {
                    arg: rename(&e.arg, e.alphabet_size, rng::derive_str(*key, &task.id)),
                    ..e.clone()
                }),
                PerturbKind::CharNoise { rate } if *rate > 0.0 => {
                    let noise = 1.0 - (1.0 - e.noise) * (1.0 - rate.clamp(0.0, 1.0));
                    instruction_task(InstructionEnv { noise, ..e.clone() })
                }
                _ => task.clone(),
            },
            EnvSpec::Mdp(c) => match &self.kind {
                PerturbKind::SlipIncrement { delta } if *delta != 0.0 => {
                    let slip = (c.slip + delta).clamp(0.0, 1.0);
                    let horizon = (task.horizon != c.length).then_some(task.horizon);
                    chain_task(c.length, slip, horizon)
                }
                _ => task.clone(),
            },
            EnvSpec::ToolArith(_) => task.clone(),
        }
    }
}

/// Applies a seeded permutation of the first `alphabet` letters.
fn rename(arg: &str, alphabet: u8, seed: u64) -> String {
    let mut perm: Vec<u8> = (0..alphabet).collect();
    perm.shuffle(&mut rng::rng(seed));
    arg.chars()
        .map(|c| {
            let i = (c as u8).wrapping_sub(b'a');
            if i < alphabet {
                (b'a' + perm[i as usize]) as char
            } else {
                c
            }
        })
        .collect()
}

/// Family-appropriate perturbations at the given strength. At strength 0
/// every returned operator leaves task behaviour unchanged.
pub fn make_perturbations(family: &TaskFamily, noise_level: f64) -> Vec<PerturbationOp> {
    let noise = noise_level.clamp(0.0, 1.0);
    match family.kind {
        FamilyKind::Instruction { .. } => {
            let mut ops = Vec::new();
            if noise > 0.0 {
                ops.push(PerturbationOp::paraphrase(rng::derive_str(0, &family.id)));
            }
            ops.push(PerturbationOp::char_noise(noise));
            ops
        }
        FamilyKind::Mdp { .. } => vec![PerturbationOp::slip_increment(noise)],
        FamilyKind::ToolArith { .. } => vec![PerturbationOp::identity()],
    }
}
