//! Exact mutual information between a learner's output and its training
//! set, against the population/empirical gap it bounds.

use agilab::ecologies::{make_instruction_family, GoalSpec, TaskDistribution};
use agilab::inference::{lemma_c2_check, transfer_bound_check, EnumerationSetup, ScoreModel, TargetCoupling, UpdateRule};
use agilab::interaction::InstructionOp;

fn main() -> agilab::Result<()> {
    let family = make_instruction_family(2, 2)?;
    let g = |arg: &str| (GoalSpec::Instruction { op: InstructionOp::Echo, arg: arg.into() }, 0.5);
    let mu = TaskDistribution::from_goals(family, &[g("a"), g("b")])?;
    let ids: Vec<String> = mu.support().iter().map(|t| t.id.clone()).collect();

    for (rule, n) in [(UpdateRule::Memorize, 1), (UpdateRule::Majority, 3), (UpdateRule::Constant, 2)] {
        let setup = EnumerationSetup {
            tasks: ids.clone(),
            n,
            rule: rule.clone(),
            scores: ScoreModel::SeenUnseen { seen: 1.0, unseen: 0.0 },
        };
        let r = transfer_bound_check(&setup, &mu)?;
        println!("{rule:?} n={n}: I = {:.4} nats, gap = {:+.4}, bound = {:.4}, ok = {}", r.mi_exact, r.gap, r.bound, r.satisfied);
        for c in [TargetCoupling::Independent, TargetCoupling::FirstOfDataset] {
            let t = lemma_c2_check(&setup, &mu, c)?;
            println!("    target {c:?}: I = {:.4}, gap = {:+.4}, bound = {:.4}", t.mi_target_data, t.gap, t.bound);
        }
    }
    Ok(())
}
