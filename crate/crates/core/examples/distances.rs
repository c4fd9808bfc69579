//! Total variation and Wasserstein distances between task distributions.

use agilab::distances::{mixture_tv_bound, tv_distance, wasserstein, GroundMetric};
use agilab::ecologies::{make_mdp_family, GoalSpec, TaskDistribution};

fn main() -> agilab::Result<()> {
    let family = make_mdp_family(3, &[0.0, 0.5, 1.0])?;
    let chain = |slip| GoalSpec::Chain { slip, length: None, horizon: None };
    let mu = TaskDistribution::from_goals(family.clone(), &[(chain(0.0), 0.6), (chain(0.5), 0.4)])?;
    let bad = TaskDistribution::from_goals(family, &[(chain(1.0), 1.0)])?;
    let eta = 0.25;
    let shifted = mu.mixture(&bad, eta)?;
    println!("tv(mu, mixture) = {} <= {}", tv_distance(&mu, &shifted)?, mixture_tv_bound(eta));

    let ids: Vec<String> = shifted.support().iter().map(|t| t.id.clone()).collect();
    let slips: [f64; 3] = [0.0, 0.5, 1.0];
    let mut pairs = Vec::new();
    for (i, a) in ids.iter().enumerate() {
        for (j, b) in ids.iter().enumerate() {
            pairs.push((a.clone(), b.clone(), (slips[i] - slips[j]).abs()));
        }
    }
    let d = GroundMetric::from_pairs(pairs);
    println!("W1 under slip distance = {}", wasserstein(&mu, &shifted, &d, 1)?);
    println!("W2 under slip distance = {}", wasserstein(&mu, &shifted, &d, 2)?);
    println!("W1 under the discrete metric = {}", wasserstein(&mu, &shifted, &GroundMetric::discrete(), 1)?);
    Ok(())
}
