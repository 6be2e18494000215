use palette_core::Verdict;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Serialize)]
pub struct BudgetReport {
    pub limit: u64,
    /// Search nodes spent, when the subcommand searches.
    pub nodes: Option<u64>,
    pub exceeded: bool,
}

/// What a subcommand hands back to the dispatcher.
#[derive(Debug)]
pub struct Outcome {
    pub result: Value,
    pub details: Option<Value>,
    pub nodes: Option<u64>,
    pub exceeded: bool,
    /// `false` makes the process exit with status 2.
    pub definite: bool,
    pub seed: Option<u64>,
}

impl Outcome {
    pub fn new(result: Value) -> Self {
        Outcome {
            result,
            details: None,
            nodes: None,
            exceeded: false,
            definite: true,
            seed: None,
        }
    }

    pub fn details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn nodes(mut self, nodes: u64) -> Self {
        self.nodes = Some(nodes);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn definite(mut self, definite: bool) -> Self {
        self.definite = definite;
        self
    }

    /// Marks a search that ran out of budget.
    pub fn exceeded(mut self, exceeded: bool) -> Self {
        self.exceeded = exceeded;
        self.definite &= !exceeded;
        self
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub command: String,
    pub inputs_digest: String,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    pub budget_report: BudgetReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// `true`, `false` or `"unknown"`.
pub fn verdict(v: Verdict) -> Value {
    match v {
        Verdict::Yes => Value::Bool(true),
        Verdict::No => Value::Bool(false),
        Verdict::Unknown => Value::String("unknown".into()),
    }
}

/// Counts beyond `u64` are written as decimal strings.
pub fn big(n: u128) -> Value {
    u64::try_from(n).map_or_else(|_| Value::String(n.to_string()), Value::from)
}
