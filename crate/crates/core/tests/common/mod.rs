#![allow(dead_code)]

pub mod stub;

use std::path::PathBuf;

use bichain::logic::{Entity, KnowledgeBase, Literal, Polarity};
use bichain::modules::{
    CheckOutcome, CheckTarget, ConfusionInput, DeductionStep, FailureKind, GoalRuleSelection, GoalSet, ModuleBackend,
    ModuleFailure, ModuleKind, ModuleResult, RelevantFacts, RuleSelection,
};
use bichain::parser::Hypothesis;
use bichain::parser::{parse_problem, ParseOptions, Problem, Statement};
use bichain::remote::{CassetteRecorder, TemplateSet};
use proptest::prelude::*;

pub const FIXTURES: [&str; 4] = ["squirrel_blue", "cow_chases_bear", "cow_likes_tiger", "bear_not_big"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.pw"))
}

pub fn fixture(name: &str) -> Problem {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    parse_problem(&text, ParseOptions { allow_free_text: true }).expect("fixture parses")
}

pub fn problem(text: &str) -> Problem {
    parse_problem(text, ParseOptions::default()).expect("test problem parses")
}

const CONSTANTS: [&str; 8] = ["bear", "cat", "cow", "dog", "lion", "mouse", "squirrel", "tiger"];
const ADJECTIVES: [&str; 8] = ["big", "blue", "cold", "green", "kind", "red", "round", "young"];
const VERBS: [&str; 6] = ["chases", "eats", "likes", "needs", "sees", "visits"];

pub fn constant() -> impl Strategy<Value = Entity> {
    prop::sample::select(&CONSTANTS[..]).prop_map(Entity::constant)
}

fn polarity() -> impl Strategy<Value = Polarity> {
    prop::bool::weighted(0.7).prop_map(|p| if p { Polarity::Positive } else { Polarity::Negative })
}

/// Constant, or the rule variable with probability `var`.
pub fn entity(var: f64) -> impl Strategy<Value = Entity> {
    prop::bool::weighted(var).prop_flat_map(|v| if v { Just(Entity::Var).boxed() } else { constant().boxed() })
}

/// Literal whose entities are drawn by `entity(var)`. Both slots of a
/// relation may hold the variable.
pub fn literal(var: f64) -> impl Strategy<Value = Literal> {
    let attr =
        (entity(var), prop::sample::select(&ADJECTIVES[..]), polarity()).prop_map(|(s, a, p)| Literal::attr(s, a, p));
    let rel = (prop::sample::select(&VERBS[..]), entity(var), entity(var), polarity())
        .prop_map(|(v, s, o, p)| Literal::rel(v, s, o, p));
    prop_oneof![attr, rel]
}

pub fn ground_literal() -> impl Strategy<Value = Literal> {
    literal(0.0)
}

/// Fact or rule inside the grammar: a variable in the consequent is always
/// introduced by some condition.
pub fn statement() -> impl Strategy<Value = Statement> {
    let fact = ground_literal().prop_map(Statement::Fact);
    let rule = (prop::collection::vec(literal(0.4), 1..4), literal(0.5)).prop_map(|(conditions, consequent)| {
        let bound = conditions.iter().any(Literal::has_var);
        let consequent = if bound { consequent } else { ground(&consequent) };
        Statement::Rule { conditions, consequent }
    });
    prop_oneof![1 => fact, 3 => rule]
}

/// The literal with every variable replaced by the cow.
pub fn ground(l: &Literal) -> Literal {
    bichain::logic::substitute(l, &bichain::logic::Binding::to("cow")).expect("binding covers the variable")
}

/// Records a cassette like [`CassetteRecorder`], except that the `nth`
/// call (0-based) to `target` gets a garbled answer on tape and a parse
/// failure in the live run. Replaying the tape follows the same path.
pub struct Corrupting {
    pub inner: CassetteRecorder,
    target: ModuleKind,
    nth: usize,
    seen: usize,
    pub garbage: String,
}

impl Corrupting {
    pub fn new(target: ModuleKind, nth: usize) -> Self {
        Corrupting {
            inner: CassetteRecorder::new(TemplateSet::default()),
            target,
            nth,
            seen: 0,
            garbage: "Honestly it could go either way; I would rather not say.".to_string(),
        }
    }

    /// Whether the garbled answer was handed out.
    pub fn fired(&self) -> bool {
        self.seen > self.nth
    }

    fn guard<T>(&mut self, kind: ModuleKind, result: ModuleResult<T>) -> ModuleResult<T> {
        if kind != self.target {
            return result;
        }
        self.seen += 1;
        if self.seen - 1 != self.nth {
            return result;
        }
        let last = self.inner.cassette.interactions.last_mut().expect("recorded");
        last.response = self.garbage.clone();
        Err(ModuleFailure::new(FailureKind::Parse, "garbled answer"))
    }
}

impl ModuleBackend for Corrupting {
    fn name(&self) -> &str {
        "corrupting-recorder"
    }

    fn begin(&mut self, hypothesis: &Hypothesis, free_text: &[String]) {
        self.inner.begin(hypothesis, free_text);
    }

    fn fact_identify(&mut self, hypothesis: &Hypothesis, kb: &KnowledgeBase) -> ModuleResult<RelevantFacts> {
        let r = self.inner.fact_identify(hypothesis, kb);
        self.guard(ModuleKind::FactIdentify, r)
    }

    fn rule_select_forward(
        &mut self,
        relevant: &RelevantFacts,
        kb: &KnowledgeBase,
        targets: &[Literal],
    ) -> ModuleResult<RuleSelection> {
        let r = self.inner.rule_select_forward(relevant, kb, targets);
        self.guard(ModuleKind::RuleSelectForward, r)
    }

    fn rule_select_backward(&mut self, goals: &[Literal], kb: &KnowledgeBase) -> ModuleResult<GoalRuleSelection> {
        let r = self.inner.rule_select_backward(goals, kb);
        self.guard(ModuleKind::RuleSelectBackward, r)
    }

    fn logic_deduce(
        &mut self,
        relevant: &RelevantFacts,
        selection: &RuleSelection,
        kb: &KnowledgeBase,
    ) -> ModuleResult<DeductionStep> {
        let r = self.inner.logic_deduce(relevant, selection, kb);
        self.guard(ModuleKind::LogicDeduce, r)
    }

    fn logic_abduce(&mut self, selection: &GoalRuleSelection, kb: &KnowledgeBase) -> ModuleResult<Vec<GoalSet>> {
        let r = self.inner.logic_abduce(selection, kb);
        self.guard(ModuleKind::LogicAbduce, r)
    }

    fn fact_check(&mut self, target: CheckTarget<'_>, kb: &KnowledgeBase) -> ModuleResult<CheckOutcome> {
        let r = self.inner.fact_check(target, kb);
        self.guard(ModuleKind::FactCheck, r)
    }

    fn confusion_check(&mut self, input: ConfusionInput<'_>, kb: &KnowledgeBase) -> ModuleResult<bool> {
        let r = self.inner.confusion_check(input, kb);
        self.guard(ModuleKind::ConfusionCheck, r)
    }
}
