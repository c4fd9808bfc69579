mod common;

use agilab::adversary::{prescribed_failure_shift, small_mass_shift, tv_constrained_adversary, worst_case_distribution};
use agilab::agents::{make_agent, AgentSpec, Script};
use agilab::distances::tv_distance;
use agilab::functionals::{estimate_generality, Evaluator, SamplingPlan};
use agilab::interaction::{AgentHandle, Budget};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn forward() -> AgentHandle {
    make_agent(&AgentSpec::scripted(Script::AlwaysForward), &[]).unwrap()
}

#[test]
fn worst_case_is_the_per_task_minimum_and_no_grid_point_beats_it() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let plan = SamplingPlan::exact(16);
    let agent = forward();
    for trial in 0..10 {
        let mu = random_dist(&mut rng, 8);
        let (star, value) = worst_case_distribution(mu.family(), mu.support(), &agent, &Budget::ample(), &plan, trial).unwrap();
        let ev = Evaluator::new(&agent, &Budget::ample(), &plan, trial);
        let values: Vec<f64> = mu.support().iter().map(|t| ev.eval(t).unwrap().estimate.mean).collect();
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(value, min);
        assert_eq!(star.len(), 1);
        assert!(grid_minimum(&values, 100, 20_000, &mut rng) >= value - 1e-12);
    }
}

#[test]
fn tv_adversary_is_optimal_on_the_two_point_example() {
    let agent = forward();
    // slip 0 scores 1, slip 1 scores 0
    let mu = dist(&[(0, 0.5), (10, 0.5)]);
    let plan = SamplingPlan::exact(4);
    let d = tv_constrained_adversary(&mu, &agent, &Budget::ample(), 0.3, &plan, 0).unwrap();
    assert!((d.weight_of(&pool()[0].id) - 0.2).abs() < 1e-12);
    let g = estimate_generality(&d, &agent, &Budget::ample(), &plan, 0).unwrap().mean;
    assert!((g - 0.2).abs() < 1e-12);
    // brute force over w = weight on the good task, 
    let best = (0..=1000)
        .map(|i| i as f64 / 1000.0)
        .filter(|w| (w - 0.5).abs() <= 0.3 + 1e-12)
        .fold(f64::INFINITY, f64::min);
    assert!((g - best).abs() < 1e-9);
    let at_one = tv_constrained_adversary(&mu, &agent, &Budget::ample(), 1.0, &plan, 0).unwrap();
    let (star, _) = worst_case_distribution(mu.family(), mu.support(), &agent, &Budget::ample(), &plan, 0).unwrap();
    assert_eq!(at_one.support()[0].id, star.support()[0].id);
    assert_eq!(at_one.len(), 1);
}

#[test]
fn shift_stays_within_eta() {
    let agent = forward();
    let mu = dist(&[(0, 1.0)]);
    for eta in [0.05, 0.2, 0.7] {
        let c = small_mass_shift(&mu, &agent, &Budget::ample(), 0.5, eta, &SamplingPlan::exact(4), 1).unwrap().unwrap();
        assert!(tv_distance(&mu, &c.mu_prime).unwrap() <= eta + 1e-12);
        assert!((c.failure_mass - eta).abs() < 1e-12);
    }
}

#[test]
fn prescribed_shift_is_half_epsilon_away() {
    let mu = dist(&[(0, 0.5), (1, 0.5)]);
    let cliff = vec![pool()[9].clone(), pool()[10].clone()];
    let shifted = prescribed_failure_shift(&mu, &cliff, 0.4).unwrap();
    assert!((tv_distance(&mu, &shifted).unwrap() - 0.2).abs() < 1e-12);
}
