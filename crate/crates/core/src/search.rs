use serde::{Deserialize, Serialize};

/// Node limit for exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Budget(pub u64);

impl Budget {
    pub const DEFAULT: Budget = Budget(10_000_000);
    pub const UNLIMITED: Budget = Budget(u64::MAX);
}

impl Default for Budget {
    fn default() -> Self {
        Budget::DEFAULT
    }
}

/// Node counter checked against a [`Budget`].
#[derive(Debug, Clone)]
pub struct Meter {
    limit: u64,
    pub nodes: u64,
}

impl Meter {
    pub fn new(budget: Budget) -> Self {
        Meter {
            limit: budget.0,
            nodes: 0,
        }
    }

    /// Counts one node; `false` once the budget is spent.
    pub fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.nodes <= self.limit
    }

    pub fn exhausted(&self) -> bool {
        self.nodes > self.limit
    }

    pub fn remaining(&self) -> Budget {
        Budget(self.limit.saturating_sub(self.nodes))
    }
}

/// Result of a bounded search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "witness", rename_all = "snake_case")]
pub enum SearchOutcome<T> {
    Found(T),
    Absent,
    BudgetExceeded,
}

impl<T> SearchOutcome<T> {
    pub fn verdict(&self) -> Verdict {
        match self {
            SearchOutcome::Found(_) => Verdict::Yes,
            SearchOutcome::Absent => Verdict::No,
            SearchOutcome::BudgetExceeded => Verdict::Unknown,
        }
    }

    pub fn found(self) -> Option<T> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> SearchOutcome<U> {
        match self {
            SearchOutcome::Found(t) => SearchOutcome::Found(f(t)),
            SearchOutcome::Absent => SearchOutcome::Absent,
            SearchOutcome::BudgetExceeded => SearchOutcome::BudgetExceeded,
        }
    }
}

/// A search outcome together with the number of nodes visited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report<T> {
    pub outcome: T,
    pub nodes: u64,
}

/// Three-valued answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl std::ops::Not for Verdict {
    type Output = Verdict;
    fn not(self) -> Verdict {
        match self {
            Verdict::Yes => Verdict::No,
            Verdict::No => Verdict::Yes,
            Verdict::Unknown => Verdict::Unknown,
        }
    }
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    pub fn is_definite(self) -> bool {
        self != Verdict::Unknown
    }

    pub fn to_bool(self) -> Option<bool> {
        match self {
            Verdict::Yes => Some(true),
            Verdict::No => Some(false),
            Verdict::Unknown => None,
        }
    }

    /// Three-valued conjunction.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
            (Verdict::Yes, Verdict::Yes) => Verdict::Yes,
            _ => Verdict::Unknown,
        }
    }
}
