#![allow(dead_code)]

use agilab::distances::GroundMetric;
use agilab::ecologies::{chain_task, make_mdp_family, TaskDistribution, TaskFamily};
use agilab::interaction::Task;
use rand::Rng;

pub const POOL: usize = 11;

pub fn family() -> TaskFamily {
    make_mdp_family(3, &[0.0, 1.0]).unwrap()
}

/// Distinct chain tasks used as an id pool.
pub fn pool() -> Vec<Task> {
    (0..POOL).map(|i| chain_task(3, i as f64 / 10.0, None)).collect()
}

pub fn dist(entries: &[(usize, f64)]) -> TaskDistribution {
    let p = pool();
    TaskDistribution::from_weighted(family(), entries.iter().map(|(i, w)| (p[*i].clone(), *w)).collect()).unwrap()
}

pub fn random_dist<R: Rng>(rng: &mut R, max_support: usize) -> TaskDistribution {
    let k = rng.gen_range(1..=max_support);
    let entries: Vec<(usize, f64)> = (0..k).map(|_| (rng.gen_range(0..POOL), rng.gen_range(0.01..1.0))).collect();
    dist(&entries)
}

/// Euclidean ground metric over the pool from planar points.
pub fn planar_metric(points: &[(f64, f64)]) -> GroundMetric {
    let p = pool();
    let mut pairs = Vec::new();
    for (i, a) in p.iter().enumerate() {
        for (j, b) in p.iter().enumerate() {
            let d = ((points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2)).sqrt();
            pairs.push((a.id.clone(), b.id.clone(), d));
        }
    }
    GroundMetric::from_pairs(pairs)
}

pub fn random_points<R: Rng>(rng: &mut R) -> Vec<(f64, f64)> {
    (0..POOL).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect()
}

/// Minimum transport cost by enumerating every basic feasible solution of
/// the transportation polytope: each basis is a spanning tree of the
/// complete bipartite graph, whose flow is forced by leaf elimination.
pub fn brute_force_transport(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    let edges: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let k = m + n - 1;
    let mut best = f64::INFINITY;
    let mut pick = Vec::with_capacity(k);
    subsets(&edges, k, 0, &mut pick, &mut |chosen| {
        if let Some(flow) = tree_flow(supply, demand, chosen) {
            if flow.iter().all(|f| *f >= -1e-12) {
                let c: f64 = chosen.iter().zip(&flow).map(|((i, j), f)| cost[*i][*j] * f).sum();
                best = best.min(c);
            }
        }
    });
    best
}

fn subsets<F: FnMut(&[(usize, usize)])>(
    edges: &[(usize, usize)],
    k: usize,
    start: usize,
    pick: &mut Vec<(usize, usize)>,
    f: &mut F,
) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for e in start..edges.len() {
        if edges.len() - e < k - pick.len() {
            break;
        }
        pick.push(edges[e]);
        subsets(edges, k, e + 1, pick, f);
        pick.pop();
    }
}

fn tree_flow(supply: &[f64], demand: &[f64], edges: &[(usize, usize)]) -> Option<Vec<f64>> {
    let m = supply.len();
    let nodes = m + demand.len();
    let mut rest: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let mut alive = vec![true; edges.len()];
    let mut flow = vec![0.0; edges.len()];
    for _ in 0..edges.len() {
        let mut degree = vec![0usize; nodes];
        for (e, (i, j)) in edges.iter().enumerate() {
            if alive[e] {
                degree[*i] += 1;
                degree[m + j] += 1;
            }
        }
        let (e, leaf) = edges.iter().enumerate().filter(|(e, _)| alive[*e]).find_map(|(e, (i, j))| {
            if degree[*i] == 1 {
                Some((e, *i))
            } else if degree[m + j] == 1 {
                Some((e, m + j))
            } else {
                None
            }
        })?;
        let (i, j) = edges[e];
        let other = if leaf == i { m + j } else { i };
        flow[e] = rest[leaf];
        rest[other] -= rest[leaf];
        rest[leaf] = 0.0;
        alive[e] = false;
    }
    rest.iter().all(|r| r.abs() < 1e-9).then_some(flow)
}

/// Minimum of `Σ w_i v_i` over weight vectors on the simplex grid with
/// spacing 1/steps. Exhaustive while the grid has at most `cap` points,
/// otherwise vertices plus `cap` uniformly drawn grid points.
pub fn grid_minimum<R: Rng>(values: &[f64], steps: usize, cap: usize, rng: &mut R) -> f64 {
    let k = values.len();
    let mut best = f64::INFINITY;
    if grid_size(k, steps) <= cap as f64 {
        let mut w = vec![0usize; k];
        compositions(steps, 0, &mut w, &mut |w| {
            let g: f64 = w.iter().zip(values).map(|(a, v)| *a as f64 / steps as f64 * v).sum();
            best = best.min(g);
        });
        return best;
    }
    for v in values {
        best = best.min(*v);
    }
    for _ in 0..cap {
        // stars and bars: k-1 sorted cut points in 0..=steps
        let mut cuts: Vec<usize> = (0..k - 1).map(|_| rng.gen_range(0..=steps)).collect();
        cuts.sort_unstable();
        let mut prev = 0;
        let mut g = 0.0;
        for (i, v) in values.iter().enumerate() {
            let next = if i + 1 < k { cuts[i] } else { steps };
            g += (next - prev) as f64 / steps as f64 * v;
            prev = next;
        }
        best = best.min(g);
    }
    best
}

fn grid_size(k: usize, steps: usize) -> f64 {
    // C(steps + k - 1, k - 1)
    (1..k).fold(1.0, |acc, i| acc * (steps + i) as f64 / i as f64)
}

fn compositions<F: FnMut(&[usize])>(left: usize, i: usize, w: &mut Vec<usize>, f: &mut F) {
    if i + 1 == w.len() {
        w[i] = left;
        f(w);
        return;
    }
    for a in 0..=left {
        w[i] = a;
        compositions(left - a, i + 1, w, f);
    }
}
