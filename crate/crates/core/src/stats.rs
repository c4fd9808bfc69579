//! Concentration bounds and three-valued decisions.

use serde::{Deserialize, Serialize};

/// Slack used when comparing exact weight sums against thresholds.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Two-sided Hoeffding radius for the mean of `n` observations in [0,1]:
/// sqrt(ln(2/alpha) / (2n)).
pub fn hoeffding_radius(n: usize, alpha: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Conjunction: any fail dominates, then any inconclusive.
    pub fn all<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Verdict {
        let mut out = Verdict::Pass;
        for v in verdicts {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Pass => {}
            }
        }
        out
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Decide `value >= target` from an interval estimate.
pub fn decide_at_least(lower: f64, upper: f64, target: f64) -> Verdict {
    if lower >= target - WEIGHT_TOL {
        Verdict::Pass
    } else if upper < target - WEIGHT_TOL {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

/// Decide `value <= target` from an interval estimate.
pub fn decide_at_most(lower: f64, upper: f64, target: f64) -> Verdict {
    if upper <= target + WEIGHT_TOL {
        Verdict::Pass
    } else if lower > target + WEIGHT_TOL {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

/// Point estimate with a confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn exact(v: f64) -> Self {
        Interval { point: v, lower: v, upper: v }
    }

    pub fn around(point: f64, half_width: f64, lo: f64, hi: f64) -> Self {
        Interval {
            point,
            lower: (point - half_width).max(lo),
            upper: (point + half_width).min(hi),
        }
    }
}

/// Accumulates the probability mass of an event whose per-item membership
/// is known only up to an interval: `certain` items count toward the lower
/// bound, `possible` items toward the upper bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct EventMass {
    point: f64,
    lower: f64,
    upper: f64,
    total: f64,
}

impl EventMass {
    pub fn add(&mut self, weight: f64, point: bool, certain: bool, possible: bool) {
        self.total += weight;
        if point {
            self.point += weight;
        }
        if certain {
            self.lower += weight;
        }
        if possible {
            self.upper += weight;
        }
    }

    pub fn interval(&self) -> Interval {
        Interval {
            point: self.point,
            lower: self.lower,
            upper: self.upper,
        }
    }

    /// Sample-frequency interval: masses normalized by total weight and widened
    /// by the Hoeffding radius for `n` draws.
    pub fn sampled(&self, n: usize, alpha: f64) -> Interval {
        let norm = if self.total > 0.0 { self.total } else { 1.0 };
        let r = hoeffding_radius(n, alpha);
        Interval {
            point: self.point / norm,
            lower: (self.lower / norm - r).max(0.0),
            upper: (self.upper / norm + r).min(1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hoeffding_matches_closed_form() {
        let r = hoeffding_radius(10_000, 0.05);
        assert!((r - 0.013_580_986).abs() < 1e-6, "{r}");
    }

    #[test]
    fn verdict_conjunction() {
        use Verdict::*;
        assert_eq!(Verdict::all([Pass, Pass]), Pass);
        assert_eq!(Verdict::all([Pass, Inconclusive]), Inconclusive);
        assert_eq!(Verdict::all([Inconclusive, Fail, Pass]), Fail);
    }

    #[test]
    fn decisions_are_three_valued() {
        assert_eq!(decide_at_least(0.95, 0.95, 0.9), Verdict::Pass);
        assert_eq!(decide_at_least(0.5, 0.85, 0.9), Verdict::Fail);
        assert_eq!(decide_at_least(0.8, 0.95, 0.9), Verdict::Inconclusive);
        assert_eq!(decide_at_most(0.0, 0.05, 0.1), Verdict::Pass);
        assert_eq!(decide_at_most(0.2, 0.3, 0.1), Verdict::Fail);
    }
}
