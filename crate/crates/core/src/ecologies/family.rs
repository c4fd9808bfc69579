use rand::Rng;
use serde::{Deserialize, Serialize};

use super::expr;
use crate::error::{Error, Result};
use crate::interaction::{
    Budget, ChainEnv, EnvSpec, InstructionEnv, InstructionOp, Interface, Task, ToolEnv,
    UtilitySpec,
};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyKind {
    Instruction {
        alphabet_size: u8,
        max_len: usize,
        #[serde(default)]
        banned: Option<String>,
    },
    ToolArith {
        max_operands: usize,
        operand_min: i64,
        operand_max: i64,
    },
    Mdp {
        chain_length: usize,
        slip_grid: Vec<f64>,
    },
}

/// A set of tasks sharing an interface, given by a generator (goal records
/// compiled into tasks) and an admissibility predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskFamily {
    pub id: String,
    #[serde(flatten)]
    pub kind: FamilyKind,
}

/// Parameter record from which a family member is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GoalSpec {
    Instruction {
        op: InstructionOp,
        arg: String,
    },
    Tool {
        expr: String,
    },
    Chain {
        slip: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<usize>,
    },
    Compose {
        first: Box<GoalSpec>,
        second: Box<GoalSpec>,
    },
}

/// Resource growth applied to a budget when tasks are composed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetGrowth {
    /// Component-wise sum of the two component budgets.
    #[default]
    Sum,
    /// Component-wise multiple `factor * B`.
    Linear { factor: u64 },
}

impl BudgetGrowth {
    pub fn apply(&self, budget: &Budget) -> Budget {
        match self {
            BudgetGrowth::Sum => *budget + *budget,
            BudgetGrowth::Linear { factor } => {
                let k = *factor;
                Budget {
                    comp_steps: budget.comp_steps.saturating_mul(k),
                    mem_cells: budget.mem_cells.saturating_mul(k),
                    episodes: budget.episodes.saturating_mul(k),
                    interaction_steps: budget.interaction_steps.saturating_mul(k),
                    tool_calls: budget.tool_calls.saturating_mul(k),
                }
            }
        }
    }
}

pub fn instruction_task(env: InstructionEnv) -> Task {
    let mut id = format!("instr:{}:{}", env.op, env.arg);
    if env.noise > 0.0 {
        id.push_str(&format!("~noise={}", env.noise));
    }
    Task {
        id,
        env: EnvSpec::Instruction(env),
        utility: UtilitySpec::ExactMatch,
        horizon: 1,
    }
}

pub fn tool_task(expr_src: &str) -> Result<Task> {
    let expr: String = expr_src.chars().filter(|c| !c.is_whitespace()).collect();
    let value = expr::eval(&expr).map_err(|e| Error::Expression {
        expr: expr_src.to_string(),
        reason: e.to_string(),
    })?;
    Ok(Task {
        id: format!("tool:{expr}"),
        env: EnvSpec::ToolArith(ToolEnv { expr, value }),
        utility: UtilitySpec::ExactMatch,
        // one calculator call, then the answer
        horizon: 2,
    })
}

pub fn chain_task(length: usize, slip: f64, horizon: Option<usize>) -> Task {
    let h = horizon.unwrap_or(length);
    let mut id = format!("chain:len={length}:slip={slip}");
    if h != length {
        id.push_str(&format!(":h={h}"));
    }
    Task {
        id,
        env: EnvSpec::Mdp(ChainEnv { length, slip }),
        utility: UtilitySpec::ReachGoal,
        horizon: h,
    }
}

/// Sequential composition: `t1` then `t2`, utility is the product, horizon
/// is the sum.
pub fn compose(t1: &Task, t2: &Task, _growth: BudgetGrowth) -> Result<Task> {
    if t1.interface() != t2.interface() {
        return Err(Error::IncompatibleTasks {
            left: t1.id.clone(),
            right: t2.id.clone(),
        });
    }
    Ok(Task {
        id: format!("({})+({})", t1.id, t2.id),
        env: EnvSpec::Composed {
            first: Box::new(t1.clone()),
            second: Box::new(t2.clone()),
        },
        utility: UtilitySpec::Product,
        horizon: t1.horizon + t2.horizon,
    })
}

pub fn make_instruction_family(alphabet_size: u8, max_len: usize) -> Result<TaskFamily> {
    if !(2..=26).contains(&alphabet_size) {
        return Err(Error::Precondition(format!(
            "alphabet_size must be in 2..=26, got {alphabet_size}"
        )));
    }
    if max_len == 0 {
        return Err(Error::Precondition("max_len must be positive".into()));
    }
    Ok(TaskFamily {
        id: format!("instruction(a={alphabet_size},len<={max_len})"),
        kind: FamilyKind::Instruction {
            alphabet_size,
            max_len,
            banned: None,
        },
    })
}

pub fn make_tool_family(max_operands: usize, operand_range: (i64, i64)) -> Result<TaskFamily> {
    let (lo, hi) = operand_range;
    if max_operands == 0 || lo > hi {
        return Err(Error::Precondition(format!(
            "need max_operands >= 1 and a nonempty operand range, got {max_operands} and {lo}..={hi}"
        )));
    }
    Ok(TaskFamily {
        id: format!("tool-arith(ops<={max_operands},{lo}..={hi})"),
        kind: FamilyKind::ToolArith {
            max_operands,
            operand_min: lo,
            operand_max: hi,
        },
    })
}

pub fn make_mdp_family(chain_length: usize, slip_grid: &[f64]) -> Result<TaskFamily> {
    if chain_length < 2 {
        return Err(Error::Precondition("chain_length must be at least 2".into()));
    }
    if let Some(s) = slip_grid.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::Precondition(format!("slip {s} outside [0,1]")));
    }
    Ok(TaskFamily {
        id: format!("chain(len={chain_length})"),
        kind: FamilyKind::Mdp {
            chain_length,
            slip_grid: slip_grid.to_vec(),
        },
    })
}

impl TaskFamily {
    pub fn with_banned(mut self, token: impl Into<String>) -> Self {
        if let FamilyKind::Instruction { banned, .. } = &mut self.kind {
            *banned = Some(token.into());
        }
        self
    }

    pub fn interface(&self) -> Interface {
        match self.kind {
            FamilyKind::Instruction { .. } => Interface::Text,
            FamilyKind::ToolArith { .. } => Interface::Calculator,
            FamilyKind::Mdp { .. } => Interface::Chain,
        }
    }

    pub fn has_violation_predicate(&self) -> bool {
        match &self.kind {
            FamilyKind::Instruction { banned, .. } => banned.is_some(),
            FamilyKind::ToolArith { .. } => false,
            FamilyKind::Mdp { .. } => true,
        }
    }

    fn check_goal(&self, goal: &GoalSpec) -> std::result::Result<(), String> {
        match (&self.kind, goal) {
            (_, GoalSpec::Compose { first, second }) => {
                self.check_goal(first)?;
                self.check_goal(second)
            }
            (
                FamilyKind::Instruction {
                    alphabet_size,
                    max_len,
                    ..
                },
                GoalSpec::Instruction { arg, .. },
            ) => {
                let n = arg.chars().count();
                if n == 0 || n > *max_len {
                    return Err(format!("argument length {n} outside 1..={max_len}"));
                }
                let top = (b'a' + alphabet_size - 1) as char;
                match arg.chars().find(|c| !('a'..=top).contains(c)) {
                    Some(c) => Err(format!("character `{c}` outside alphabet a..={top}")),
                    None => Ok(()),
                }
            }
            (
                FamilyKind::ToolArith {
                    max_operands,
                    operand_min,
                    operand_max,
                },
                GoalSpec::Tool { expr: src },
            ) => {
                let (_, count) = expr::eval_counting(src).map_err(|e| e.to_string())?;
                if count > *max_operands {
                    return Err(format!("{count} operands exceed the limit {max_operands}"));
                }
                let lits = expr::literals(src).map_err(|e| e.to_string())?;
                match lits.iter().find(|v| !(*operand_min..=*operand_max).contains(*v)) {
                    Some(v) => Err(format!("operand {v} outside {operand_min}..={operand_max}")),
                    None => Ok(()),
                }
            }
            (
                FamilyKind::Mdp { .. },
                GoalSpec::Chain {
                    slip,
                    length,
                    horizon,
                },
            ) => {
                if !(0.0..=1.0).contains(slip) {
                    return Err(format!("slip {slip} outside [0,1]"));
                }
                if length.is_some_and(|l| l < 2) {
                    return Err("chain length must be at least 2".into());
                }
                if *horizon == Some(0) {
                    return Err("horizon must be positive".into());
                }
                Ok(())
            }
            (kind, goal) => Err(format!("goal {goal:?} does not belong to a {kind:?} family")),
        }
    }

    /// Deterministic goal-to-task compilation.
    pub fn compile(&self, goal: &GoalSpec) -> Result<Task> {
        self.check_goal(goal).map_err(|reason| Error::InadmissibleGoal {
            family: self.id.clone(),
            reason,
        })?;
        self.build(goal)
    }

    fn build(&self, goal: &GoalSpec) -> Result<Task> {
        match (&self.kind, goal) {
            (_, GoalSpec::Compose { first, second }) => {
                compose(&self.build(first)?, &self.build(second)?, BudgetGrowth::Sum)
            }
            (
                FamilyKind::Instruction {
                    alphabet_size,
                    banned,
                    ..
                },
                GoalSpec::Instruction { op, arg },
            ) => Ok(instruction_task(InstructionEnv {
                op: *op,
                arg: arg.clone(),
                alphabet_size: *alphabet_size,
                noise: 0.0,
                banned: banned.clone(),
            })),
            (FamilyKind::ToolArith { .. }, GoalSpec::Tool { expr }) => tool_task(expr),
            (
                FamilyKind::Mdp { chain_length, .. },
                GoalSpec::Chain {
                    slip,
                    length,
                    horizon,
                },
            ) => Ok(chain_task(length.unwrap_or(*chain_length), *slip, *horizon)),
            _ => unreachable!("checked by check_goal"),
        }
    }

    /// Membership predicate. Broader than the generator: perturbed members
    /// (noisy prompts, shifted slip) are admissible as long as their
    /// parameters stay in range.
    pub fn admissible(&self, task: &Task) -> bool {
        match (&self.kind, &task.env) {
            (_, EnvSpec::Composed { first, second }) => {
                self.admissible(first) && self.admissible(second)
            }
            (
                FamilyKind::Instruction {
                    alphabet_size,
                    max_len,
                    ..
                },
                EnvSpec::Instruction(e),
            ) => {
                let top = (b'a' + alphabet_size - 1) as char;
                e.alphabet_size == *alphabet_size
                    && (1..=*max_len).contains(&e.arg.chars().count())
                    && e.arg.chars().all(|c| ('a'..=top).contains(&c))
                    && (0.0..=1.0).contains(&e.noise)
                    && task.horizon == 1
            }
            (
                FamilyKind::ToolArith {
                    max_operands,
                    operand_min,
                    operand_max,
                },
                EnvSpec::ToolArith(t),
            ) => {
                matches!(expr::eval_counting(&t.expr), Ok((v, n)) if v == t.value && n <= *max_operands)
                    && expr::literals(&t.expr)
                        .is_ok_and(|l| l.iter().all(|v| (*operand_min..=*operand_max).contains(v)))
            }
            (FamilyKind::Mdp { .. }, EnvSpec::Mdp(c)) => {
                c.length >= 2 && (0.0..=1.0).contains(&c.slip) && task.horizon >= 1
            }
            _ => false,
        }
    }

    /// Up to `cap` members in a fixed order, used for sweeps beyond a
    /// distribution's support.
    pub fn enumerate(&self, cap: usize) -> Vec<Task> {
        let mut out = Vec::new();
        match &self.kind {
            FamilyKind::Instruction {
                alphabet_size,
                max_len,
                ..
            } => {
                let ops = [
                    InstructionOp::Reverse,
                    InstructionOp::Uppercase,
                    InstructionOp::Rotate(1),
                    InstructionOp::Echo,
                ];
                let m = *alphabet_size as usize;
                'outer: for len in 1..=*max_len {
                    let count = m.checked_pow(len as u32).unwrap_or(usize::MAX);
                    for code in 0..count {
                        let mut arg = String::with_capacity(len);
                        let mut c = code;
                        for _ in 0..len {
                            arg.insert(0, (b'a' + (c % m) as u8) as char);
                            c /= m;
                        }
                        for op in ops {
                            if out.len() >= cap {
                                break 'outer;
                            }
                            out.push(
                                self.build(&GoalSpec::Instruction { op, arg: arg.clone() })
                                    .expect("enumerated goals are admissible"),
                            );
                        }
                    }
                }
            }
            FamilyKind::ToolArith {
                max_operands,
                operand_min,
                operand_max,
            } => {
                let mut r = rng::rng(rng::derive_str(0, &self.id));
                let mut seen = std::collections::BTreeSet::new();
                let mut attempts = 0;
                while out.len() < cap && attempts < cap * 20 {
                    attempts += 1;
                    let k = r.gen_range(1..=*max_operands);
                    let src = random_expression(&mut r, k, *operand_min, *operand_max);
                    if seen.insert(src.clone()) {
                        if let Ok(t) = tool_task(&src) {
                            out.push(t);
                        }
                    }
                }
            }
            FamilyKind::Mdp {
                chain_length,
                slip_grid,
            } => {
                out.extend(
                    slip_grid
                        .iter()
                        .take(cap)
                        .map(|s| chain_task(*chain_length, *s, None)),
                );
            }
        }
        out
    }
}

fn literal(v: i64) -> String {
    if v < 0 {
        format!("({v})")
    } else {
        v.to_string()
    }
}

fn random_expression<R: Rng>(r: &mut R, operands: usize, lo: i64, hi: i64) -> String {
    let ops = ['+', '-', '*'];
    let mut s = literal(r.gen_range(lo..=hi));
    for i in 1..operands {
        let op = ops[r.gen_range(0..ops.len())];
        let rhs = literal(r.gen_range(lo..=hi));
        s = if i == 1 && operands > 2 {
            format!("({s}{op}{rhs})")
        } else {
            format!("{s}{op}{rhs}")
        };
    }
    s
}

/// Compile a goal into a task of `family`.
pub fn compile_goal(goal: &GoalSpec, family: &TaskFamily) -> Result<Task> {
    family.compile(goal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compile_is_deterministic() {
        let f = make_instruction_family(3, 4).unwrap();
        let g = GoalSpec::Instruction {
            op: InstructionOp::Reverse,
            arg: "ab".into(),
        };
        let a = compile_goal(&g, &f).unwrap();
        let b = compile_goal(&g, &f).unwrap();
        assert_eq!(a.id, b.id);
        assert_eq!(a, b);
    }

    #[test]
    fn chain_goal_compiles_with_params() {
        let f = make_mdp_family(3, &[0.0]).unwrap();
        let t = compile_goal(
            &GoalSpec::Chain {
                slip: 0.1,
                length: Some(4),
                horizon: None,
            },
            &f,
        )
        .unwrap();
        assert_eq!(t.env, EnvSpec::Mdp(ChainEnv { length: 4, slip: 0.1 }));
        assert_eq!(t.horizon, 4);
    }

    #[test]
    fn inadmissible_goals_are_rejected() {
        let f = make_instruction_family(2, 2).unwrap();
        let bad = GoalSpec::Instruction {
            op: InstructionOp::Echo,
            arg: "abc".into(),
        };
        assert!(matches!(compile_goal(&bad, &f), Err(Error::InadmissibleGoal { .. })));
        let wrong_kind = GoalSpec::Tool { expr: "1+1".into() };
        assert!(compile_goal(&wrong_kind, &f).is_err());
        let tools = make_tool_family(2, (0, 9)).unwrap();
        assert!(compile_goal(&GoalSpec::Tool { expr: "1+2+3".into() }, &tools).is_err());
        assert!(compile_goal(&GoalSpec::Tool { expr: "12+3".into() }, &tools).is_err());
    }

    #[test]
    fn enumerated_members_are_admissible() {
        for f in [
            make_instruction_family(3, 2).unwrap(),
            make_tool_family(3, (-5, 9)).unwrap(),
            make_mdp_family(3, &[0.0, 0.5, 1.0]).unwrap(),
        ] {
            let members = f.enumerate(64);
            assert!(!members.is_empty());
            let ids: std::collections::BTreeSet<_> = members.iter().map(|t| &t.id).collect();
            assert_eq!(ids.len(), members.len());
            for t in &members {
                assert!(f.admissible(t), "{} not admissible in {}", t.id, f.id);
            }
        }
    }

    #[test]
    fn composition_adds_horizons() {
        let f = make_mdp_family(2, &[0.5]).unwrap();
        let t = chain_task(2, 0.5, None);
        let c = compose(&t, &t, BudgetGrowth::Sum).unwrap();
        assert_eq!(c.horizon, 4);
        assert!(f.admissible(&c));
        let tool = tool_task("1+1").unwrap();
        assert!(compose(&t, &tool, BudgetGrowth::Sum).is_err());
    }

    #[test]
    fn sum_growth_doubles_budget() {
        let b = Budget::uniform(3);
        assert_eq!(BudgetGrowth::Sum.apply(&b), Budget::uniform(6));
        assert_eq!(BudgetGrowth::Linear { factor: 3 }.apply(&b), Budget::uniform(9));
    }
}
