//! Exact distances between finite-support task distributions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ecologies::TaskDistribution;
use crate::error::{Error, Result};

/// Largest merged support accepted by [`wasserstein`].
pub const MAX_TRANSPORT_SUPPORT: usize = 64;

const FLOW_EPS: f64 = 1e-15;

fn merged(mu1: &TaskDistribution, mu2: &TaskDistribution) -> Result<BTreeMap<String, (f64, f64)>> {
    if mu1.family().id != mu2.family().id {
        return Err(Error::FamilyMismatch(
            mu1.family().id.clone(),
            mu2.family().id.clone(),
        ));
    }
    let mut m: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for (t, w) in mu1.iter() {
        m.entry(t.id.clone()).or_default().0 += w;
    }
    for (t, w) in mu2.iter() {
        m.entry(t.id.clone()).or_default().1 += w;
    }
    Ok(m)
}

/// d_TV(μ₁, μ₂) = ½ Σ |w₁(τ) − w₂(τ)| over the merged support.
pub fn tv_distance(mu1: &TaskDistribution, mu2: &TaskDistribution) -> Result<f64> {
    let m = merged(mu1, mu2)?;
    let s: f64 = m.values().map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * s).min(1.0))
}

/// Analytic TV bound for the mixture `(1−η)μ + η·δ`: η itself.
pub fn mixture_tv_bound(eta: f64) -> f64 {
    eta
}

/// Ground metric on task ids: an explicit sparse list of pairs, with an
/// optional fallback distance for distinct ids not listed (1.0 gives the
/// discrete metric).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundMetric {
    #[serde(default)]
    pub pairs: Vec<(String, String, f64)>,
    #[serde(default)]
    pub default: Option<f64>,
}

impl GroundMetric {
    /// 0/1 metric.
    pub fn discrete() -> Self {
        GroundMetric {
            pairs: Vec::new(),
            default: Some(1.0),
        }
    }

    pub fn from_pairs(pairs: Vec<(String, String, f64)>) -> Self {
        GroundMetric {
            pairs,
            default: None,
        }
    }

    fn table(&self) -> Result<BTreeMap<(String, String), f64>> {
        let mut t = BTreeMap::new();
        for (a, b, d) in &self.pairs {
            if !(d.is_finite() && *d >= 0.0) {
                return Err(Error::InvalidMetric(format!("d({a},{b}) = {d}")));
            }
            if a == b && *d != 0.0 {
                return Err(Error::InvalidMetric(format!("d({a},{a}) = {d} is not zero")));
            }
            for key in [(a.clone(), b.clone()), (b.clone(), a.clone())] {
                if let Some(prev) = t.insert(key, *d) {
                    if prev != *d {
                        return Err(Error::InvalidMetric(format!("d({a},{b}) is not symmetric")));
                    }
                }
            }
        }
        Ok(t)
    }

    /// Distance matrix over `ids`, after checking the metric axioms on them.
    pub fn matrix(&self, ids: &[&str]) -> Result<Vec<Vec<f64>>> {
        let t = self.table()?;
        if let Some(d) = self.default {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidMetric(format!("default distance {d}")));
            }
        }
        let n = ids.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                m[i][j] = match t.get(&(ids[i].to_string(), ids[j].to_string())) {
                    Some(d) => *d,
                    None => self.default.ok_or_else(|| {
                        Error::InvalidMetric(format!("no distance for ({}, {})", ids[i], ids[j]))
                    })?,
                };
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if m[i][k] > m[i][j] + m[j][k] + 1e-12 {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails at ({}, {}, {})",
                            ids[i], ids[j], ids[k]
                        )));
                    }
                }
            }
        }
        Ok(m)
    }

    /// Checks symmetry, zero diagonal and the triangle inequality over `ids`.
    pub fn validate(&self, ids: &[&str]) -> Result<()> {
        self.matrix(ids).map(|_| ())
    }
}

/// W_p(μ₁, μ₂) under `ground`, solved exactly as a min-cost flow.
pub fn wasserstein(
    mu1: &TaskDistribution,
    mu2: &TaskDistribution,
    ground: &GroundMetric,
    p: u32,
) -> Result<f64> {
    if p == 0 {
        return Err(Error::Precondition("p must be positive".into()));
    }
    let m = merged(mu1, mu2)?;
    if m.len() > MAX_TRANSPORT_SUPPORT {
        return Err(Error::SupportTooLarge {
            size: m.len(),
            limit: MAX_TRANSPORT_SUPPORT,
        });
    }
    let ids: Vec<&str> = m.keys().map(|s| s.as_str()).collect();
    let d = ground.matrix(&ids)?;
    let supply: Vec<f64> = m.values().map(|x| x.0).collect();
    let demand: Vec<f64> = m.values().map(|x| x.1).collect();
    let cost: Vec<Vec<f64>> = d
        .iter()
        .map(|row| row.iter().map(|x| x.powi(p as i32)).collect())
        .collect();
    let c = transport_cost(&supply, &demand, &cost);
    Ok(c.max(0.0).powf(1.0 / p as f64))
}

struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

/// Minimum cost of moving `supply` onto `demand` with unit costs `cost[i][j]`.
/// Both vectors must carry the same total mass (up to rounding).
pub fn transport_cost(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let src: Vec<usize> = (0..supply.len()).filter(|&i| supply[i] > 0.0).collect();
    let dst: Vec<usize> = (0..demand.len()).filter(|&j| demand[j] > 0.0).collect();
    let (ns, nd) = (src.len(), dst.len());
    let s = 0;
    let t = ns + nd + 1;
    let mut edges: Vec<Edge> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); t + 1];
    let add = |edges: &mut Vec<Edge>, adj: &mut Vec<Vec<usize>>, a: usize, b: usize, cap: f64, c: f64| {
        adj[a].push(edges.len());
        edges.push(Edge { to: b, cap, cost: c });
        adj[b].push(edges.len());
        edges.push(Edge { to: a, cap: 0.0, cost: -c });
    };
    for (k, &i) in src.iter().enumerate() {
        add(&mut edges, &mut adj, s, 1 + k, supply[i], 0.0);
    }
    for (k, &j) in dst.iter().enumerate() {
        add(&mut edges, &mut adj, 1 + ns + k, t, demand[j], 0.0);
    }
    for (a, &i) in src.iter().enumerate() {
        for (b, &j) in dst.iter().enumerate() {
            add(&mut edges, &mut adj, 1 + a, 1 + ns + b, f64::INFINITY, cost[i][j]);
        }
    }
    let target = supply.iter().sum::<f64>().min(demand.iter().sum());
    let mut flow = 0.0;
    let mut total = 0.0;
    while flow < target - 1e-13 {
        // Bellman-Ford: residual costs may be negative
        let mut dist = vec![f64::INFINITY; t + 1];
        let mut prev: Vec<Option<usize>> = vec![None; t + 1];
        dist[s] = 0.0;
        for _ in 0..=t {
            let mut changed = false;
            for u in 0..=t {
                if dist[u] == f64::INFINITY {
                    continue;
                }
                for &e in &adj[u] {
                    let ed = &edges[e];
                    if ed.cap > FLOW_EPS && dist[u] + ed.cost < dist[ed.to] - 1e-15 {
                        dist[ed.to] = dist[u] + ed.cost;
                        prev[ed.to] = Some(e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[t] == f64::INFINITY {
            break;
        }
        let mut push = target - flow;
        let mut v = t;
        while let Some(e) = prev[v] {
            push = push.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        if push <= FLOW_EPS {
            break;
        }
        let mut v = t;
        while let Some(e) = prev[v] {
            edges[e].cap -= push;
            edges[e ^ 1].cap += push;
            total += push * edges[e].cost;
            v = edges[e ^ 1].to;
        }
        flow += push;
    }
    total
}

/// Ids in either support, sorted.
pub fn merged_ids(mu1: &TaskDistribution, mu2: &TaskDistribution) -> BTreeSet<String> {
    mu1.support()
        .iter()
        .chain(mu2.support())
        .map(|t| t.id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecologies::{chain_task, make_mdp_family};

    fn mu(weights: &[f64]) -> TaskDistribution {
        let slips: Vec<f64> = (0..weights.len()).map(|i| i as f64 / 10.0).collect();
        let fam = make_mdp_family(3, &slips).unwrap();
        let tasks: Vec<_> = slips.iter().map(|s| chain_task(3, *s, None)).collect();
        let (t, w): (Vec<_>, Vec<_>) = tasks
            .into_iter()
            .zip(weights.iter().copied())
            .filter(|(_, w)| *w > 0.0)
            .unzip();
        TaskDistribution::new(fam, t, w).unwrap()
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&mu(&[0.5, 0.5]), &mu(&[0.5, 0.5])).unwrap(), 0.0);
        assert!((tv_distance(&mu(&[0.5, 0.5]), &mu(&[0.8, 0.2])).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(tv_distance(&mu(&[1.0, 0.0]), &mu(&[0.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn wasserstein_examples() {
        let g = GroundMetric::discrete();
        assert_eq!(wasserstein(&mu(&[0.5, 0.5]), &mu(&[0.5, 0.5]), &g, 1).unwrap(), 0.0);
        assert!((wasserstein(&mu(&[0.5, 0.5]), &mu(&[1.0, 0.0]), &g, 1).unwrap() - 0.5).abs() < 1e-12);
        let a = chain_task(3, 0.0, None).id;
        let b = chain_task(3, 0.1, None).id;
        let g = GroundMetric::from_pairs(vec![(a, b, 2.5)]);
        assert!((wasserstein(&mu(&[1.0, 0.0]), &mu(&[0.0, 1.0]), &g, 2).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn metric_validation() {
        let ids = ["a", "b", "c"];
        let bad = GroundMetric::from_pairs(vec![
            ("a".into(), "b".into(), 1.0),
            ("b".into(), "c".into(), 1.0),
            ("a".into(), "c".into(), 3.0),
        ]);
        assert!(matches!(bad.validate(&ids), Err(Error::InvalidMetric(_))));
        let asym = GroundMetric::from_pairs(vec![
            ("a".into(), "b".into(), 1.0),
            ("b".into(), "a".into(), 2.0),
        ]);
        assert!(asym.validate(&["a", "b"]).is_err());
        assert!(GroundMetric::discrete().validate(&ids).is_ok());
    }

    #[test]
    fn support_limit() {
        let slips: Vec<f64> = (0..65).map(|i| i as f64 / 64.0).collect();
        let fam = make_mdp_family(3, &slips).unwrap();
        let tasks: Vec<_> = slips.iter().map(|s| chain_task(3, *s, None)).collect();
        let m = TaskDistribution::uniform(fam, tasks).unwrap();
        assert!(matches!(
            wasserstein(&m, &m, &GroundMetric::discrete(), 1),
            Err(Error::SupportTooLarge { size: 65, .. })
        ));
    }
}
