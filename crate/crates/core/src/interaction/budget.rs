use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

/// Resource counters granted to (or spent by) an agent.
///
/// `interaction_steps` stands in for a time budget: it counts environment
/// steps, not seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    pub comp_steps: u64,
    pub mem_cells: u64,
    pub episodes: u64,
    pub interaction_steps: u64,
    pub tool_calls: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetComponent {
    CompSteps,
    MemCells,
    Episodes,
    InteractionSteps,
    ToolCalls,
}

impl fmt::Display for BudgetComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetComponent::CompSteps => "comp_steps",
            BudgetComponent::MemCells => "mem_cells",
            BudgetComponent::Episodes => "episodes",
            BudgetComponent::InteractionSteps => "interaction_steps",
            BudgetComponent::ToolCalls => "tool_calls",
        })
    }
}

/// Result of [`spend`]: either the remaining budget or the first component
/// that would go negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spend {
    Remaining(Budget),
    Exhausted(BudgetComponent),
}

impl Budget {
    pub const ZERO: Budget = Budget {
        comp_steps: 0,
        mem_cells: 0,
        episodes: 0,
        interaction_steps: 0,
        tool_calls: 0,
    };

    /// Large enough that no built-in task or learning phase can exhaust it.
    pub fn ample() -> Budget {
        Budget::uniform(1 << 24)
    }

    pub fn uniform(n: u64) -> Budget {
        Budget {
            comp_steps: n,
            mem_cells: n,
            episodes: n,
            interaction_steps: n,
            tool_calls: n,
        }
    }

    pub fn with(mut self, component: BudgetComponent, value: u64) -> Budget {
        *self.get_mut(component) = value;
        self
    }

    pub fn get(&self, component: BudgetComponent) -> u64 {
        match component {
            BudgetComponent::CompSteps => self.comp_steps,
            BudgetComponent::MemCells => self.mem_cells,
            BudgetComponent::Episodes => self.episodes,
            BudgetComponent::InteractionSteps => self.interaction_steps,
            BudgetComponent::ToolCalls => self.tool_calls,
        }
    }

    fn get_mut(&mut self, component: BudgetComponent) -> &mut u64 {
        match component {
            BudgetComponent::CompSteps => &mut self.comp_steps,
            BudgetComponent::MemCells => &mut self.mem_cells,
            BudgetComponent::Episodes => &mut self.episodes,
            BudgetComponent::InteractionSteps => &mut self.interaction_steps,
            BudgetComponent::ToolCalls => &mut self.tool_calls,
        }
    }

    pub const COMPONENTS: [BudgetComponent; 5] = [
        BudgetComponent::CompSteps,
        BudgetComponent::MemCells,
        BudgetComponent::Episodes,
        BudgetComponent::InteractionSteps,
        BudgetComponent::ToolCalls,
    ];

    /// Component-wise `self <= other`.
    pub fn fits_within(&self, other: &Budget) -> bool {
        Self::COMPONENTS.iter().all(|c| self.get(*c) <= other.get(*c))
    }

    /// First component in which `self` exceeds `limit`.
    pub fn first_excess(&self, limit: &Budget) -> Option<BudgetComponent> {
        Self::COMPONENTS
            .iter()
            .copied()
            .find(|c| self.get(*c) > limit.get(*c))
    }
}

impl Add for Budget {
    type Output = Budget;

    fn add(self, rhs: Budget) -> Budget {
        Budget {
            comp_steps: self.comp_steps.saturating_add(rhs.comp_steps),
            mem_cells: self.mem_cells.saturating_add(rhs.mem_cells),
            episodes: self.episodes.saturating_add(rhs.episodes),
            interaction_steps: self.interaction_steps.saturating_add(rhs.interaction_steps),
            tool_calls: self.tool_calls.saturating_add(rhs.tool_calls),
        }
    }
}

/// Component-wise subtraction. Exhaustion is reported as a value naming the
/// first component that would go negative.
pub fn spend(budget: Budget, delta: Budget) -> Spend {
    let mut out = budget;
    for c in Budget::COMPONENTS {
        match budget.get(c).checked_sub(delta.get(c)) {
            Some(v) => *out.get_mut(c) = v,
            None => return Spend::Exhausted(c),
        }
    }
    Spend::Remaining(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spend_subtracts_componentwise() {
        let b = Budget::uniform(10);
        let d = Budget::ZERO.with(BudgetComponent::CompSteps, 3);
        assert_eq!(
            spend(b, d),
            Spend::Remaining(Budget::uniform(10).with(BudgetComponent::CompSteps, 7))
        );
    }

    #[test]
    fn spend_zero_is_identity() {
        let b = Budget::uniform(4).with(BudgetComponent::ToolCalls, 1);
        assert_eq!(spend(b, Budget::ZERO), Spend::Remaining(b));
    }

    #[test]
    fn spend_reports_exhausted_component() {
        let b = Budget::uniform(5).with(BudgetComponent::ToolCalls, 1);
        let d = Budget::ZERO.with(BudgetComponent::ToolCalls, 2);
        assert_eq!(spend(b, d), Spend::Exhausted(BudgetComponent::ToolCalls));
    }

    fn arb_budget() -> impl Strategy<Value = Budget> {
        (0u64..50, 0u64..50, 0u64..50, 0u64..50, 0u64..50).prop_map(|(a, b, c, d, e)| Budget {
            comp_steps: a,
            mem_cells: b,
            episodes: c,
            interaction_steps: d,
            tool_calls: e,
        })
    }

    proptest! {
        #[test]
        fn spend_then_add_restores(b in arb_budget(), d in arb_budget()) {
            match spend(b, d) {
                Spend::Remaining(r) => prop_assert_eq!(r + d, b),
                Spend::Exhausted(c) => prop_assert!(d.get(c) > b.get(c)),
            }
        }
    }
}
