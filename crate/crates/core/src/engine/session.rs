use crate::logic::{FactId, KnowledgeBase, Literal};
use crate::modules::{
    CheckOutcome, CheckTarget, ConfusionInput, DeductionStep, Derivation, FailureKind, GoalRuleSelection, GoalSet,
    ModuleBackend, ModuleFailure, ModuleKind, ModuleResult, ProofStep, RelevantFacts, RuleSelection,
};
use crate::oracle::assume_condition;
use crate::parser::{render_literal, Hypothesis, Label};

use super::trace::{Action, DerivationRecord, Direction, ProofTrace, StepOutput, SwitchReason, TraceStep};
use super::{EngineKind, Verdict};

fn ids<T: ToString>(items: &[T]) -> Vec<String> {
    items.iter().map(ToString::to_string).collect()
}

fn sentences<'l>(lits: impl IntoIterator<Item = &'l Literal>) -> Vec<String> {
    lits.into_iter().map(render_literal).collect()
}

/// One evaluation's mutable state: working facts, trace and warnings.
/// Every module invocation goes through here, so the call count is the
/// number of module steps in the trace by construction.
pub(crate) struct Session<'a> {
    kind: EngineKind,
    backend: &'a mut dyn ModuleBackend,
    pub kb: KnowledgeBase,
    pub hypothesis: Hypothesis,
    inherited: Vec<DerivationRecord>,
    steps: Vec<TraceStep>,
    warnings: Vec<String>,
    pub direction: Direction,
    aborted: bool,
}

impl<'a> Session<'a> {
    pub fn new(
        kind: EngineKind,
        kb: &KnowledgeBase,
        hypothesis: &Hypothesis,
        inherited: Vec<DerivationRecord>,
        free_text: &[String],
        backend: &'a mut dyn ModuleBackend,
    ) -> Self {
        backend.begin(hypothesis, free_text);
        let kb = assume_condition(kb, hypothesis);
        let mut warnings = Vec::new();
        if !kb.is_consistent() {
            warnings.push("inconsistent knowledge base: a fact and its negation are both given".to_string());
        }
        Session {
            kind,
            backend,
            kb,
            hypothesis: hypothesis.clone(),
            inherited,
            steps: Vec::new(),
            warnings,
            direction: Direction::Forward,
            aborted: false,
        }
    }

    /// A transport failure ends the evaluation.
    pub fn aborted(&self) -> bool {
        self.aborted
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    fn push(
        &mut self,
        action: Action,
        inputs: Vec<String>,
        output: StepOutput,
        rendered: Vec<String>,
        confusion: bool,
    ) {
        let exchange = if action.is_call() { self.backend.take_exchange() } else { None };
        if exchange.as_ref().is_some_and(|e| e.fallback) {
            self.warnings.push(format!("step {}: response needed the lenient fallback parser", self.steps.len()));
        }
        self.steps.push(TraceStep {
            index: self.steps.len(),
            direction: self.direction,
            action,
            inputs,
            output,
            rendered,
            confusion,
            exchange,
        });
    }

    fn failed<T>(&mut self, module: ModuleKind, inputs: Vec<String>, failure: ModuleFailure) -> Option<T> {
        self.warnings.push(format!("{module} failed: {failure}"));
        if failure.kind == FailureKind::Transport {
            self.aborted = true;
        }
        self.push(Action::Module(module), inputs, StepOutput::Failure { failure }, Vec::new(), false);
        None
    }

    fn settle<T>(
        &mut self,
        module: ModuleKind,
        inputs: Vec<String>,
        result: ModuleResult<T>,
        describe: impl FnOnce(&T) -> (StepOutput, Vec<String>, bool),
    ) -> Option<T> {
        match result {
            Ok(value) => {
                let (output, rendered, confusion) = describe(&value);
                self.push(Action::Module(module), inputs, output, rendered, confusion);
                Some(value)
            }
            Err(failure) => self.failed(module, inputs, failure),
        }
    }

    pub fn fact_identify(&mut self) -> Option<RelevantFacts> {
        let inputs = vec![render_literal(&self.hypothesis.consequent)];
        let result = self.backend.fact_identify(&self.hypothesis, &self.kb);
        let kb = self.kb.clone();
        self.settle(ModuleKind::FactIdentify, inputs, result, |r| {
            let rendered = r.facts.iter().filter_map(|id| kb.fact(*id)).map(|f| render_literal(&f.literal)).collect();
            (StepOutput::Facts { facts: r.facts.clone() }, rendered, false)
        })
    }

    pub fn select_forward(&mut self, relevant: &RelevantFacts, targets: &[Literal]) -> Option<RuleSelection> {
        let mut inputs = ids(&relevant.facts);
        inputs.extend(sentences(targets));
        let result = self.backend.rule_select_forward(relevant, &self.kb, targets);
        self.settle(ModuleKind::RuleSelectForward, inputs, result, |s| {
            (StepOutput::Selection { rules: s.rules.clone(), bridge: s.bridge }, ids(&s.rules), false)
        })
    }

    pub fn select_backward(&mut self, goals: &[Literal]) -> Option<GoalRuleSelection> {
        let inputs = sentences(goals);
        let result = self.backend.rule_select_backward(goals, &self.kb);
        self.settle(ModuleKind::RuleSelectBackward, inputs, result, |s| {
            let rendered = s
                .groups
                .iter()
                .filter(|g| !g.rules.is_empty())
                .map(|g| format!("{}: {}", render_literal(&g.goal), ids(&g.rules).join(", ")))
                .collect();
            (StepOutput::GoalRules { groups: s.groups.clone() }, rendered, false)
        })
    }

    /// Runs deduction and admits its conclusions into the working facts.
    /// Returns the step and the ids of the facts actually added.
    pub fn deduce(
        &mut self,
        relevant: &RelevantFacts,
        selection: &RuleSelection,
    ) -> Option<(DeductionStep, Vec<FactId>)> {
        let inputs = ids(&selection.rules);
        match self.backend.logic_deduce(relevant, selection, &self.kb) {
            Ok(step) => {
                let records = self.admit_all(&step.derivations);
                let added: Vec<FactId> = records.iter().filter_map(|r| r.id).collect();
                let rendered = sentences(records.iter().map(|r| &r.literal));
                self.push(
                    Action::Module(ModuleKind::LogicDeduce),
                    inputs,
                    StepOutput::Derivations { derivations: records },
                    rendered,
                    false,
                );
                Some((step, added))
            }
            Err(failure) => self.failed(ModuleKind::LogicDeduce, inputs, failure),
        }
    }

    fn admit_all(&mut self, derivations: &[Derivation]) -> Vec<DerivationRecord> {
        let mut records = Vec::new();
        for d in derivations {
            if self.kb.contains(&d.literal) {
                continue;
            }
            let id = match self.kb.add_derived(d.literal.clone(), d.rule, d.premises.clone()) {
                Ok(outcome) => Some(outcome.id()),
                Err(e) => {
                    self.warnings.push(format!("unsupported derivation of {}: {e}", render_literal(&d.literal)));
                    None
                }
            };
            records.push(DerivationRecord {
                id,
                literal: d.literal.clone(),
                rule: d.rule,
                binding: d.binding.clone(),
                premises: d.premises.clone(),
            });
        }
        records
    }

    pub fn abduce(&mut self, selection: &GoalRuleSelection) -> Option<Vec<GoalSet>> {
        let inputs = selection
            .groups
            .iter()
            .flat_map(|g| g.rules.iter().map(|r| format!("{r} -> {}", render_literal(&g.goal))))
            .collect();
        let result = self.backend.logic_abduce(selection, &self.kb);
        self.settle(ModuleKind::LogicAbduce, inputs, result, |sets| {
            let rendered = sets
                .iter()
                .map(|s| {
                    let goals: Vec<String> = s.literals().map(render_literal).collect();
                    format!("{} <= {}: {}", render_literal(&s.target), s.origin_rule, goals.join(" and "))
                })
                .collect();
            (StepOutput::GoalSets { sets: sets.clone() }, rendered, false)
        })
    }

    pub fn fact_check(&mut self, target: CheckTarget<'_>) -> Option<CheckOutcome> {
        let inputs = match target {
            CheckTarget::Hypothesis(h) => vec![render_literal(&h.consequent)],
            CheckTarget::GoalSet(s) => sentences(s.literals()),
            CheckTarget::Frontier { hypothesis, goal_sets } => {
                let mut v = vec![render_literal(&hypothesis.consequent)];
                v.push(format!("{} goal sets", goal_sets.len()));
                v
            }
        };
        let result = self.backend.fact_check(target, &self.kb);
        self.settle(ModuleKind::FactCheck, inputs, result, |c| {
            (StepOutput::Check { label: c.label, cited: c.cited.clone() }, vec![c.label.to_string()], false)
        })
    }

    pub fn confusion(&mut self, input: ConfusionInput<'_>) -> Option<bool> {
        let inputs = match input {
            ConfusionInput::Deductions(step) => sentences(step.derivations.iter().map(|d| &d.literal)),
            ConfusionInput::Abductions(sets) => {
                sets.iter().map(|s| format!("{} <= {}", render_literal(&s.target), s.origin_rule)).collect()
            }
        };
        let result = self.backend.confusion_check(input, &self.kb);
        self.settle(ModuleKind::ConfusionCheck, inputs, result, |c| {
            (StepOutput::Confusion { confused: *c }, vec![c.to_string()], *c)
        })
    }

    /// Adds conclusions established through goal sets, premises first.
    /// Returns false if some step could not be grounded in the facts.
    pub fn conclude(&mut self, proof: &[ProofStep]) -> bool {
        let mut derivations = Vec::new();
        let mut complete = true;
        for step in proof {
            let premises: Option<Vec<FactId>> = step.premises.iter().map(|p| self.kb.lookup(p)).collect();
            let Some(premises) = premises else {
                complete = false;
                break;
            };
            let d =
                Derivation { literal: step.literal.clone(), rule: step.rule, binding: step.binding.clone(), premises };
            derivations.extend(self.admit_all(std::slice::from_ref(&d)));
        }
        if !derivations.is_empty() {
            let rendered = sentences(derivations.iter().map(|r| &r.literal));
            self.push(Action::Conclude, Vec::new(), StepOutput::Derivations { derivations }, rendered, false);
        }
        complete
    }

    pub fn switch(&mut self, reason: SwitchReason) {
        let to = self.direction.flip();
        self.push(Action::Switch, Vec::new(), StepOutput::Switch { reason, to }, vec![to.to_string()], false);
        self.direction = to;
    }

    pub fn finish(self, label: Label) -> Verdict {
        let trace = ProofTrace {
            engine: self.kind.to_string(),
            backend: self.backend.name().to_string(),
            hypothesis: self.hypothesis,
            inherited: self.inherited,
            steps: self.steps,
            label,
        };
        Verdict { label, calls: trace.calls(), trace, warnings: self.warnings }
    }
}
