use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::{Binding, FactId, Literal, RuleId};
use crate::modules::{Exchange, GoalRules, GoalSet, ModuleFailure, ModuleKind};
use crate::parser::{Hypothesis, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Module(ModuleKind),
    /// Engine bookkeeping: a conclusion established through goal sets is
    /// added to the fact set. Not an inference call.
    Conclude,
    Switch,
}

impl Action {
    pub fn is_call(self) -> bool {
        matches!(self, Action::Module(_))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Module(m) => m.fmt(f),
            Action::Conclude => f.pad("conclude"),
            Action::Switch => f.pad("switch"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchReason {
    Confusion,
    Stall,
}

/// A fact added to the working set, with the rule application claimed for
/// it. `id` is absent when the claim could not be admitted at all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationRecord {
    pub id: Option<FactId>,
    pub literal: Literal,
    pub rule: RuleId,
    pub binding: Binding,
    pub premises: Vec<FactId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepOutput {
    Facts { facts: Vec<FactId> },
    Selection { rules: Vec<RuleId>, bridge: Option<RuleId> },
    GoalRules { groups: Vec<GoalRules> },
    Derivations { derivations: Vec<DerivationRecord> },
    GoalSets { sets: Vec<GoalSet> },
    Check { label: Label, cited: Vec<FactId> },
    Confusion { confused: bool },
    Switch { reason: SwitchReason, to: Direction },
    Failure { failure: ModuleFailure },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub index: usize,
    pub direction: Direction,
    pub action: Action,
    pub inputs: Vec<String>,
    pub output: StepOutput,
    /// Output literals as sentences.
    pub rendered: Vec<String>,
    pub confusion: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exchange: Option<Exchange>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub engine: String,
    pub backend: String,
    pub hypothesis: Hypothesis,
    /// Facts carried over from earlier options of the same problem.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inherited: Vec<DerivationRecord>,
    pub steps: Vec<TraceStep>,
    pub label: Label,
}

impl ProofTrace {
    pub fn calls(&self) -> usize {
        self.steps.iter().filter(|s| s.action.is_call()).count()
    }

    /// Every derivation recorded by deduction or conclusion steps, in order.
    pub fn derivations(&self) -> impl Iterator<Item = (usize, &DerivationRecord)> {
        self.steps.iter().flat_map(|s| match &s.output {
            StepOutput::Derivations { derivations } => derivations.iter().map(move |d| (s.index, d)).collect(),
            _ => Vec::new(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
