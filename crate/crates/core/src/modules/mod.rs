//! The six reasoning modules (fact identification, rule selection, logic
//! deduction, logic abduction, fact check, confusion check) as a backend
//! contract, plus the deterministic symbolic implementation.
//!
//! Engines never count calls inside a backend; every invocation goes
//! through the engine's session, which logs one trace step per call.

mod goals;
pub mod symbolic;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::{Binding, FactId, KnowledgeBase, Literal, RuleId};
use crate::parser::{Hypothesis, Label};

pub use goals::{solve_goal_sets, GoalSolution, Justification, ProofStep};
pub use symbolic::SymbolicBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModuleKind {
    FactIdentify,
    RuleSelectForward,
    RuleSelectBackward,
    LogicDeduce,
    LogicAbduce,
    FactCheck,
    ConfusionCheck,
}

impl ModuleKind {
    pub const ALL: [ModuleKind; 7] = [
        ModuleKind::FactIdentify,
        ModuleKind::RuleSelectForward,
        ModuleKind::RuleSelectBackward,
        ModuleKind::LogicDeduce,
        ModuleKind::LogicAbduce,
        ModuleKind::FactCheck,
        ModuleKind::ConfusionCheck,
    ];
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ModuleKind::FactIdentify => "fact_identify",
            ModuleKind::RuleSelectForward => "rule_select_forward",
            ModuleKind::RuleSelectBackward => "rule_select_backward",
            ModuleKind::LogicDeduce => "logic_deduce",
            ModuleKind::LogicAbduce => "logic_abduce",
            ModuleKind::FactCheck => "fact_check",
            ModuleKind::ConfusionCheck => "confusion_check",
        })
    }
}

/// F(H): ids of the facts deemed relevant to the hypothesis.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevantFacts {
    pub facts: Vec<FactId>,
}

impl RelevantFacts {
    pub fn contains(&self, id: FactId) -> bool {
        self.facts.contains(&id)
    }

    pub fn extend(&mut self, ids: impl IntoIterator<Item = FactId>) {
        for id in ids {
            if !self.facts.contains(&id) {
                self.facts.push(id);
            }
        }
    }

    pub fn all(kb: &KnowledgeBase) -> Self {
        RelevantFacts { facts: kb.facts().iter().map(|f| f.id).collect() }
    }
}

/// Forward rule selection. When a bridge exists it is the only rule.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSelection {
    pub rules: Vec<RuleId>,
    pub bridge: Option<RuleId>,
}

impl RuleSelection {
    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// Rules whose consequent unifies with one open goal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalRules {
    pub goal: Literal,
    pub rules: Vec<RuleId>,
}

/// Backward rule selection, grouped per goal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalRuleSelection {
    pub groups: Vec<GoalRules>,
}

impl GoalRuleSelection {
    pub fn is_empty(&self) -> bool {
        self.groups.iter().all(|g| g.rules.is_empty())
    }

    pub fn rule_count(&self) -> usize {
        self.groups.iter().map(|g| g.rules.len()).sum()
    }
}

/// One new conclusion with the rule application that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub literal: Literal,
    pub rule: RuleId,
    pub binding: Binding,
    pub premises: Vec<FactId>,
}

/// F_d: the new facts produced by one deduction step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeductionStep {
    pub derivations: Vec<Derivation>,
}

impl DeductionStep {
    pub fn is_empty(&self) -> bool {
        self.derivations.is_empty()
    }

    pub fn distinct_conclusions(&self) -> usize {
        let mut seen: Vec<&Literal> = Vec::new();
        for d in &self.derivations {
            if !seen.contains(&&d.literal) {
                seen.push(&d.literal);
            }
        }
        seen.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalStatus {
    Open,
    /// Still mentions the rule variable; any constant that satisfies the
    /// whole goal set may bind it.
    OpenTemplate,
    Proven(FactId),
    Contradicted(FactId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub literal: Literal,
    pub status: GoalStatus,
}

/// A conjunction of sub-goals explaining `target` through `origin_rule`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalSet {
    pub target: Literal,
    pub origin_rule: RuleId,
    pub binding: Binding,
    pub goals: Vec<Goal>,
}

impl GoalSet {
    pub fn is_satisfied(&self) -> bool {
        self.goals.iter().all(|g| matches!(g.status, GoalStatus::Proven(_)))
    }

    pub fn is_failed(&self) -> bool {
        self.goals.iter().any(|g| matches!(g.status, GoalStatus::Contradicted(_)))
    }

    pub fn is_template(&self) -> bool {
        self.goals.iter().any(|g| g.literal.has_var())
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.goals.iter().map(|g| &g.literal)
    }

    /// Same explanation regardless of goal statuses.
    pub fn same_explanation(&self, other: &GoalSet) -> bool {
        self.target == other.target && self.origin_rule == other.origin_rule && self.binding == other.binding
    }
}

/// What fact check is asked to verify.
#[derive(Debug, Clone, Copy)]
pub enum CheckTarget<'a> {
    Hypothesis(&'a Hypothesis),
    GoalSet(&'a GoalSet),
    /// The hypothesis consequent as a disjunction of goal sets (OR over
    /// origin rules, AND within each set). Sets targeting the negated
    /// consequent count toward Disproved.
    Frontier {
        hypothesis: &'a Hypothesis,
        goal_sets: &'a [GoalSet],
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub label: Label,
    /// Facts the verdict rests on, when the backend reports them.
    pub cited: Vec<FactId>,
}

impl CheckOutcome {
    pub fn unknown() -> Self {
        CheckOutcome { label: Label::Unknown, cited: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ConfusionInput<'a> {
    Deductions(&'a DeductionStep),
    Abductions(&'a [GoalSet]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// The module's input violated its precondition.
    Precondition,
    /// The backend could not be reached; the evaluation should stop.
    Transport,
    /// The backend answered but the answer could not be interpreted.
    Parse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleFailure {
    pub kind: FailureKind,
    pub message: String,
}

impl ModuleFailure {
    pub fn new(kind: FailureKind, message: impl Into<String>) -> Self {
        ModuleFailure { kind, message: message.into() }
    }
}

impl fmt::Display for ModuleFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

/// Raw prompt/response pair captured by a remote backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub prompt: String,
    pub response: String,
    /// The lenient keyword fallback was needed to interpret the response.
    pub fallback: bool,
}

pub type ModuleResult<T> = Result<T, ModuleFailure>;

/// The capability contract every engine programs against.
pub trait ModuleBackend {
    fn name(&self) -> &str;

    /// Whether premises outside the grammar can be reasoned over.
    fn handles_free_text(&self) -> bool {
        false
    }

    /// Called once per evaluation, before any module call, with the
    /// hypothesis and any premises kept as free text.
    fn begin(&mut self, _hypothesis: &Hypothesis, _free_text: &[String]) {}

    fn fact_identify(&mut self, hypothesis: &Hypothesis, kb: &KnowledgeBase) -> ModuleResult<RelevantFacts>;

    /// `targets` are the literals a bridge rule may conclude; an empty slice
    /// disables bridging.
    fn rule_select_forward(
        &mut self,
        relevant: &RelevantFacts,
        kb: &KnowledgeBase,
        targets: &[Literal],
    ) -> ModuleResult<RuleSelection>;

    fn rule_select_backward(&mut self, goals: &[Literal], kb: &KnowledgeBase) -> ModuleResult<GoalRuleSelection>;

    fn logic_deduce(
        &mut self,
        relevant: &RelevantFacts,
        selection: &RuleSelection,
        kb: &KnowledgeBase,
    ) -> ModuleResult<DeductionStep>;

    fn logic_abduce(&mut self, selection: &GoalRuleSelection, kb: &KnowledgeBase) -> ModuleResult<Vec<GoalSet>>;

    fn fact_check(&mut self, target: CheckTarget<'_>, kb: &KnowledgeBase) -> ModuleResult<CheckOutcome>;

    /// `kb` is the current working facts, for backends that describe them.
    fn confusion_check(&mut self, input: ConfusionInput<'_>, kb: &KnowledgeBase) -> ModuleResult<bool>;

    /// The prompt/response of the most recent invocation, if any.
    fn take_exchange(&mut self) -> Option<Exchange> {
        None
    }
}
