mod common;

use std::collections::BTreeMap;

use agilab::inference::{
    exact_mutual_information, joint_law, lemma_c2_check, transfer_bound_check, EnumerationSetup, ScoreModel,
    TargetCoupling, UpdateRule,
};
use agilab::Error;
use common::*;
use proptest::prelude::*;

fn multisets(ids: &[String], n: usize) -> Vec<Vec<String>> {
    fn go(ids: &[String], n: usize, start: usize, cur: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..ids.len() {
            cur.push(ids[i].clone());
            go(ids, n, i, cur, out);
            cur.pop();
        }
    }
    let mut sorted = ids.to_vec();
    sorted.sort();
    let mut out = Vec::new();
    go(&sorted, n, 0, &mut Vec::new(), &mut out);
    out
}

fn setup(entries: &[(usize, f64)], n: usize, rule: UpdateRule, scores: ScoreModel) -> (EnumerationSetup, agilab::ecologies::TaskDistribution) {
    let mu = dist(entries);
    let tasks = mu.support().iter().map(|t| t.id.clone()).collect();
    (EnumerationSetup { tasks, n, rule, scores }, mu)
}

fn entries() -> impl Strategy<Value = Vec<(usize, f64)>> {
    prop::collection::vec((0..POOL, 0.05f64..1.0), 1..=5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coarsening_never_increases_information(e in entries(), n in 1usize..=4, labels in prop::collection::vec(0u8..3, 200)) {
        let scores = ScoreModel::SeenUnseen { seen: 1.0, unseen: 0.0 };
        let (fine, mu) = setup(&e, n, UpdateRule::Identity, scores.clone());
        let i_fine = exact_mutual_information(&fine, &mu).unwrap();
        for rule in [UpdateRule::Memorize, UpdateRule::Majority, UpdateRule::Constant] {
            let coarse = EnumerationSetup { rule, ..fine.clone() };
            let i = exact_mutual_information(&coarse, &mu).unwrap();
            prop_assert!(i >= -1e-12);
            prop_assert!(i <= i_fine + 1e-12);
        }
        let map: BTreeMap<String, String> = multisets(&fine.tasks, n)
            .into_iter()
            .enumerate()
            .map(|(k, m)| (m.join(","), format!("v{}", labels[k % labels.len()])))
            .collect();
        let merged = EnumerationSetup { rule: UpdateRule::Table { map, default: String::new() }, ..fine.clone() };
        prop_assert!(exact_mutual_information(&merged, &mu).unwrap() <= i_fine + 1e-12);
    }

    #[test]
    fn transfer_bound_holds(e in entries(), n in 1usize..=4, seen in 0.0f64..=1.0, unseen in 0.0f64..=1.0, which in 0usize..4) {
        let rule = [UpdateRule::Identity, UpdateRule::Memorize, UpdateRule::Majority, UpdateRule::Constant][which].clone();
        let (s, mu) = setup(&e, n, rule, ScoreModel::SeenUnseen { seen, unseen });
        let r = transfer_bound_check(&s, &mu).unwrap();
        prop_assert!(r.satisfied, "{r:?}");
        prop_assert!(r.gap.abs() <= r.bound + 1e-12);
    }

    #[test]
    fn joint_law_is_a_probability(e in entries(), n in 1usize..=4) {
        let (s, mu) = setup(&e, n, UpdateRule::Memorize, ScoreModel::SeenUnseen { seen: 1.0, unseen: 0.0 });
        let total: f64 = joint_law(&s, &mu).unwrap().iter().map(|a| a.prob).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_target_carries_no_information(e in entries(), n in 1usize..=4) {
        let (s, mu) = setup(&e, n, UpdateRule::Identity, ScoreModel::SeenUnseen { seen: 1.0, unseen: 0.0 });
        let r = lemma_c2_check(&s, &mu, TargetCoupling::Independent).unwrap();
        prop_assert!(r.mi_target_data.abs() < 1e-12);
        prop_assert!(r.satisfied);
    }
}

#[test]
fn memorizer_reference_case() {
    let (s, mu) = setup(&[(0, 0.5), (1, 0.5)], 1, UpdateRule::Memorize, ScoreModel::SeenUnseen { seen: 1.0, unseen: 0.0 });
    let r = transfer_bound_check(&s, &mu).unwrap();
    assert!((r.gap + 0.5).abs() < 1e-12);
    assert!((r.bound - (2.0 * 2f64.ln()).sqrt()).abs() < 1e-12);
    let c = lemma_c2_check(&s, &mu, TargetCoupling::FirstOfDataset).unwrap();
    assert!((c.gap - 0.5).abs() < 1e-12);
    assert!((c.mi_target_data - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn enumeration_limits_enforced() {
    let six: Vec<(usize, f64)> = (0..6).map(|i| (i, 1.0)).collect();
    let (s, mu) = setup(&six, 1, UpdateRule::Identity, ScoreModel::SeenUnseen { seen: 1.0, unseen: 0.0 });
    assert!(matches!(exact_mutual_information(&s, &mu), Err(Error::EnumerationLimit(_))));
    let (s, mu) = setup(&[(0, 1.0)], 5, UpdateRule::Identity, ScoreModel::SeenUnseen { seen: 1.0, unseen: 0.0 });
    assert!(matches!(exact_mutual_information(&s, &mu), Err(Error::EnumerationLimit(_))));
}
