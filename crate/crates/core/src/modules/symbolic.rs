//! Exact, deterministic implementations of the six modules.

use std::collections::HashSet;

use crate::logic::{substitute, unify, Binding, Entailment, FactId, KnowledgeBase, Literal, Rule};
use crate::parser::{Hypothesis, Label};

use super::{
    solve_goal_sets, CheckOutcome, CheckTarget, ConfusionInput, DeductionStep, Derivation, FailureKind, Goal,
    GoalRuleSelection, GoalRules, GoalSet, GoalStatus, ModuleBackend, ModuleFailure, ModuleResult, RelevantFacts,
    RuleSelection,
};

/// Facts sharing a constant with the hypothesis (consequent or condition).
/// Falls back to every fact when nothing overlaps.
pub fn fact_identify(hypothesis: &Hypothesis, kb: &KnowledgeBase) -> ModuleResult<RelevantFacts> {
    if kb.facts().is_empty() {
        return Err(ModuleFailure::new(FailureKind::Precondition, "knowledge base has no facts"));
    }
    let names: HashSet<&str> = hypothesis
        .condition
        .iter()
        .chain(std::iter::once(&hypothesis.consequent))
        .flat_map(Literal::constants)
        .collect();
    let facts: Vec<FactId> =
        kb.facts().iter().filter(|f| f.literal.constants().any(|c| names.contains(c))).map(|f| f.id).collect();
    if facts.is_empty() {
        return Ok(RelevantFacts::all(kb));
    }
    Ok(RelevantFacts { facts })
}

fn novel_firings(rule: &Rule, kb: &KnowledgeBase, allowed: impl Fn(FactId) -> bool) -> Vec<Derivation> {
    kb.firings(rule, allowed)
        .into_iter()
        .filter(|f| !kb.contains(&f.consequent))
        .map(|f| Derivation { literal: f.consequent, rule: f.rule, binding: f.binding, premises: f.premises })
        .collect()
}

/// Rules with at least one firing over the relevant facts that would add
/// something new. A rule concluding one of `targets` is a bridge and is
/// selected alone.
pub fn rule_select_forward(relevant: &RelevantFacts, kb: &KnowledgeBase, targets: &[Literal]) -> RuleSelection {
    let allowed: HashSet<FactId> = relevant.facts.iter().copied().collect();
    let mut rules = Vec::new();
    for rule in kb.rules() {
        let firings = novel_firings(rule, kb, |id| allowed.contains(&id));
        if firings.is_empty() {
            continue;
        }
        if firings.iter().any(|d| targets.contains(&d.literal)) {
            return RuleSelection { rules: vec![rule.id], bridge: Some(rule.id) };
        }
        rules.push(rule.id);
    }
    RuleSelection { rules, bridge: None }
}

/// Rules whose consequent unifies with each goal, grouped per goal.
pub fn rule_select_backward(goals: &[Literal], kb: &KnowledgeBase) -> ModuleResult<GoalRuleSelection> {
    let mut groups = Vec::with_capacity(goals.len());
    for goal in goals {
        if goal.has_var() {
            return Err(ModuleFailure::new(FailureKind::Precondition, format!("goal {goal} is not ground")));
        }
        let rules = kb.rules().iter().filter(|r| unify(&r.consequent, goal).is_some()).map(|r| r.id).collect();
        groups.push(GoalRules { goal: goal.clone(), rules });
    }
    Ok(GoalRuleSelection { groups })
}

/// Every novel consequent of the selected rules over the full fact set,
/// first derivation per literal kept.
pub fn logic_deduce(selection: &RuleSelection, kb: &KnowledgeBase) -> DeductionStep {
    let mut derivations: Vec<Derivation> = Vec::new();
    for id in &selection.rules {
        let Some(rule) = kb.rule(*id) else { continue };
        for d in novel_firings(rule, kb, |_| true) {
            if !derivations.iter().any(|e| e.literal == d.literal) {
                derivations.push(d);
            }
        }
    }
    DeductionStep { derivations }
}

pub(crate) fn goal_status(literal: &Literal, kb: &KnowledgeBase) -> GoalStatus {
    if literal.has_var() {
        return GoalStatus::OpenTemplate;
    }
    match kb.entailed(literal) {
        Entailment::Holds(id) => GoalStatus::Proven(id),
        Entailment::NegationHolds(id) => GoalStatus::Contradicted(id),
        Entailment::Undetermined => GoalStatus::Open,
    }
}

/// One goal set per (goal, rule) pair: the rule's conditions under the
/// unifier, with statuses looked up in the current facts.
pub fn logic_abduce(selection: &GoalRuleSelection, kb: &KnowledgeBase) -> ModuleResult<Vec<GoalSet>> {
    let mut out = Vec::new();
    for group in &selection.groups {
        for id in &group.rules {
            let rule = kb
                .rule(*id)
                .ok_or_else(|| ModuleFailure::new(FailureKind::Precondition, format!("unknown rule {id}")))?;
            let binding = unify(&rule.consequent, &group.goal).ok_or_else(|| {
                ModuleFailure::new(FailureKind::Precondition, format!("{id} does not conclude {}", group.goal))
            })?;
            let goals = rule
                .conditions_under(&binding)
                .into_iter()
                .map(|literal| Goal { status: goal_status(&literal, kb), literal })
                .collect();
            out.push(GoalSet { target: group.goal.clone(), origin_rule: *id, binding, goals });
        }
    }
    Ok(out)
}

fn check_literal(literal: &Literal, kb: &KnowledgeBase) -> CheckOutcome {
    match kb.entailed(literal) {
        Entailment::Holds(id) => CheckOutcome { label: Label::Proved, cited: vec![id] },
        Entailment::NegationHolds(id) => CheckOutcome { label: Label::Disproved, cited: vec![id] },
        Entailment::Undetermined => CheckOutcome::unknown(),
    }
}

fn check_goal_set(set: &GoalSet, kb: &KnowledgeBase) -> CheckOutcome {
    let mut cited = Vec::new();
    for goal in set.goals.iter().filter(|g| g.literal.is_ground()) {
        if let Entailment::NegationHolds(id) = kb.entailed(&goal.literal) {
            return CheckOutcome { label: Label::Disproved, cited: vec![id] };
        }
    }
    let candidates: Vec<Binding> = if set.is_template() {
        kb.constants().iter().map(|c| Binding::to(c)).collect()
    } else {
        vec![Binding::empty()]
    };
    'outer: for binding in candidates {
        cited.clear();
        for goal in set.literals() {
            let Ok(ground) = substitute(goal, &binding) else {
                continue 'outer;
            };
            match kb.entailed(&ground) {
                Entailment::Holds(id) => cited.push(id),
                _ => continue 'outer,
            }
        }
        return CheckOutcome { label: Label::Proved, cited };
    }
    CheckOutcome::unknown()
}

pub fn fact_check(target: CheckTarget<'_>, kb: &KnowledgeBase) -> CheckOutcome {
    match target {
        CheckTarget::Hypothesis(h) => check_literal(&h.consequent, kb),
        CheckTarget::GoalSet(set) => check_goal_set(set, kb),
        CheckTarget::Frontier { hypothesis, goal_sets } => {
            let direct = check_literal(&hypothesis.consequent, kb);
            if direct.label != Label::Unknown {
                return direct;
            }
            let q = &hypothesis.consequent;
            let not_q = q.negated();
            let solution = solve_goal_sets(goal_sets, kb);
            if solution.holds(&not_q) {
                CheckOutcome { label: Label::Disproved, cited: solution.leaf_facts(&not_q) }
            } else if solution.holds(q) {
                CheckOutcome { label: Label::Proved, cited: solution.leaf_facts(q) }
            } else {
                CheckOutcome::unknown()
            }
        }
    }
}

pub fn confusion_check(input: ConfusionInput<'_>) -> bool {
    match input {
        ConfusionInput::Deductions(step) => step.distinct_conclusions() >= 2,
        ConfusionInput::Abductions(sets) => sets
            .iter()
            .enumerate()
            .any(|(i, a)| sets[i + 1..].iter().any(|b| b.target == a.target && !a.same_explanation(b))),
    }
}

/// The exact backend. Stateless; call accounting lives in the engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct SymbolicBackend;

impl ModuleBackend for SymbolicBackend {
    fn name(&self) -> &str {
        "symbolic"
    }

    fn fact_identify(&mut self, hypothesis: &Hypothesis, kb: &KnowledgeBase) -> ModuleResult<RelevantFacts> {
        fact_identify(hypothesis, kb)
    }

    fn rule_select_forward(
        &mut self,
        relevant: &RelevantFacts,
        kb: &KnowledgeBase,
        targets: &[Literal],
    ) -> ModuleResult<RuleSelection> {
        Ok(rule_select_forward(relevant, kb, targets))
    }

    fn rule_select_backward(&mut self, goals: &[Literal], kb: &KnowledgeBase) -> ModuleResult<GoalRuleSelection> {
        rule_select_backward(goals, kb)
    }

    fn logic_deduce(
        &mut self,
        _relevant: &RelevantFacts,
        selection: &RuleSelection,
        kb: &KnowledgeBase,
    ) -> ModuleResult<DeductionStep> {
        Ok(logic_deduce(selection, kb))
    }

    fn logic_abduce(&mut self, selection: &GoalRuleSelection, kb: &KnowledgeBase) -> ModuleResult<Vec<GoalSet>> {
        logic_abduce(selection, kb)
    }

    fn fact_check(&mut self, target: CheckTarget<'_>, kb: &KnowledgeBase) -> ModuleResult<CheckOutcome> {
        Ok(fact_check(target, kb))
    }

    fn confusion_check(&mut self, input: ConfusionInput<'_>, _kb: &KnowledgeBase) -> ModuleResult<bool> {
        Ok(confusion_check(input))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::tests::{attr, c, rel};
    use crate::logic::{Entity, RuleId};
    use crate::parser::{parse_problem_text, ParseOptions, Problem};

    fn load(text: &str) -> Problem {
        parse_problem_text(text, ParseOptions::default()).unwrap()
    }

    fn cow_kb() -> KnowledgeBase {
        load(include_str!("../../fixtures/cow_chases_bear.pw")).kb
    }

    fn hyp(l: Literal) -> Hypothesis {
        Hypothesis::new(l)
    }

    #[test]
    fn identify_picks_facts_about_the_cow() {
        let kb = cow_kb();
        let r = fact_identify(&hyp(rel("chases", c("cow"), c("cow"), true)), &kb).unwrap();
        // "The bear sees the cow", "The cow is blue", "The tiger sees the cow".
        assert_eq!(r.facts, vec![FactId(3), FactId(4), FactId(11)]);
    }

    #[test]
    fn identify_falls_back_to_everything() {
        let kb = KnowledgeBase::from_parts(vec![attr(c("dog"), "red", true)], vec![]).unwrap();
        let r = fact_identify(&hyp(attr(c("cat"), "red", true)), &kb).unwrap();
        assert_eq!(r.facts, vec![FactId(1)]);
    }

    #[test]
    fn identify_rejects_empty_kb() {
        let kb = KnowledgeBase::default();
        let err = fact_identify(&hyp(attr(c("cat"), "red", true)), &kb).unwrap_err();
        assert_eq!(err.kind, FailureKind::Precondition);
    }

    #[test]
    fn forward_selection_on_cow_kb() {
        let kb = cow_kb();
        let sel = rule_select_forward(&RelevantFacts::all(&kb), &kb, &[rel("chases", c("cow"), c("bear"), true)]);
        assert!(sel.rules.contains(&RuleId(2)));
        assert_eq!(sel.bridge, None);
    }

    #[test]
    fn forward_selection_prefers_bridge() {
        let kb = cow_kb();
        let q = rel("chases", c("cow"), c("lion"), true);
        let sel = rule_select_forward(&RelevantFacts::all(&kb), &kb, &[q]);
        assert_eq!(sel.rules, vec![RuleId(2)]);
        assert_eq!(sel.bridge, Some(RuleId(2)));
    }

    #[test]
    fn forward_selection_stalls_without_firings() {
        let rule = Rule::new(RuleId(1), vec![attr(Entity::Var, "red", true)], attr(Entity::Var, "big", true)).unwrap();
        let kb = KnowledgeBase::from_parts(vec![attr(c("dog"), "blue", true)], vec![rule]).unwrap();
        assert!(rule_select_forward(&RelevantFacts::all(&kb), &kb, &[]).is_empty());
    }

    #[test]
    fn backward_selection_finds_both_rules() {
        let kb = cow_kb();
        let sel = rule_select_backward(&[rel("chases", c("cow"), c("lion"), true)], &kb).unwrap();
        assert_eq!(sel.groups[0].rules, vec![RuleId(2), RuleId(3)]);
    }

    #[test]
    fn backward_selection_respects_polarity_and_predicates() {
        let kb = cow_kb();
        let sel = rule_select_backward(&[attr(c("cow"), "happy", true)], &kb).unwrap();
        assert!(sel.is_empty());
        let sel = rule_select_backward(&[attr(c("cow"), "blue", false)], &kb).unwrap();
        assert!(sel.is_empty());
    }

    #[test]
    fn deduction_follows_the_squirrel_chain() {
        let kb = load(include_str!("../../fixtures/squirrel_blue.pw")).kb;
        let step = logic_deduce(&RuleSelection { rules: vec![RuleId(4)], bridge: None }, &kb);
        assert_eq!(step.derivations.len(), 1);
        let d = &step.derivations[0];
        assert_eq!(d.literal, attr(c("tiger"), "blue", true));
        assert_eq!(d.premises, vec![FactId(5)]);

        let mut kb = kb;
        kb.add_derived(d.literal.clone(), d.rule, d.premises.clone()).unwrap();
        let step = logic_deduce(&RuleSelection { rules: vec![RuleId(7)], bridge: None }, &kb);
        assert_eq!(step.derivations[0].literal, rel("eats", c("tiger"), c("squirrel"), true));
    }

    #[test]
    fn deduction_skips_known_conclusions() {
        let rule = Rule::new(RuleId(1), vec![attr(Entity::Var, "red", true)], attr(Entity::Var, "big", true)).unwrap();
        let kb = KnowledgeBase::from_parts(vec![attr(c("dog"), "red", true), attr(c("dog"), "big", true)], vec![rule])
            .unwrap();
        let step = logic_deduce(&RuleSelection { rules: vec![RuleId(1)], bridge: None }, &kb);
        assert!(step.is_empty());
    }

    #[test]
    fn abduction_instantiates_conditions() {
        let kb = cow_kb();
        let q = rel("chases", c("cow"), c("lion"), true);
        let sel = rule_select_backward(std::slice::from_ref(&q), &kb).unwrap();
        let sets = logic_abduce(&sel, &kb).unwrap();
        assert_eq!(sets.len(), 2);
        let lits: Vec<_> = sets[0].literals().cloned().collect();
        assert_eq!(lits, vec![attr(c("cow"), "blue", true), rel("sees", c("tiger"), c("bear"), true)]);
        assert_eq!(sets[0].origin_rule, RuleId(2));
        assert!(sets[0].is_satisfied());
        let lits: Vec<_> = sets[1].literals().cloned().collect();
        assert_eq!(lits, vec![rel("likes", c("cow"), c("tiger"), true)]);
        assert_eq!(sets[1].goals[0].status, GoalStatus::Open);
    }

    #[test]
    fn abduction_keeps_templates_open() {
        let rule = Rule::new(RuleId(1), vec![attr(Entity::Var, "red", true)], attr(c("cow"), "big", true)).unwrap();
        let kb = KnowledgeBase::from_parts(vec![attr(c("dog"), "red", true)], vec![rule]).unwrap();
        let sel = rule_select_backward(&[attr(c("cow"), "big", true)], &kb).unwrap();
        let sets = logic_abduce(&sel, &kb).unwrap();
        assert_eq!(sets[0].goals[0].status, GoalStatus::OpenTemplate);
        let out = fact_check(CheckTarget::GoalSet(&sets[0]), &kb);
        assert_eq!(out.label, Label::Proved);
        assert_eq!(out.cited, vec![FactId(1)]);
    }

    #[test]
    fn fact_check_labels() {
        let kb = KnowledgeBase::from_parts(vec![attr(c("cow"), "blue", true)], vec![]).unwrap();
        let yes = hyp(attr(c("cow"), "blue", true));
        let no = hyp(attr(c("cow"), "blue", false));
        assert_eq!(fact_check(CheckTarget::Hypothesis(&yes), &kb).label, Label::Proved);
        assert_eq!(fact_check(CheckTarget::Hypothesis(&no), &kb).label, Label::Disproved);
        let empty = KnowledgeBase::default();
        assert_eq!(fact_check(CheckTarget::Hypothesis(&yes), &empty).label, Label::Unknown);
    }

    #[test]
    fn frontier_check_chains_through_goal_sets() {
        let kb = cow_kb();
        let q = rel("chases", c("cow"), c("lion"), true);
        let sel = rule_select_backward(std::slice::from_ref(&q), &kb).unwrap();
        let sets = logic_abduce(&sel, &kb).unwrap();
        let h = hyp(q);
        let out = fact_check(CheckTarget::Frontier { hypothesis: &h, goal_sets: &sets }, &kb);
        assert_eq!(out.label, Label::Proved);
        assert_eq!(out.cited, vec![FactId(4), FactId(10)]);
    }

    #[test]
    fn confusion_counts_distinct_conclusions() {
        let d = |l: Literal| Derivation {
            literal: l,
            rule: RuleId(1),
            binding: Binding::empty(),
            premises: vec![FactId(1)],
        };
        let two = DeductionStep {
            derivations: vec![
                d(rel("eats", c("tiger"), c("squirrel"), true)),
                d(rel("likes", c("mouse"), c("squirrel"), true)),
            ],
        };
        assert!(confusion_check(ConfusionInput::Deductions(&two)));
        let one = DeductionStep { derivations: vec![d(attr(c("tiger"), "blue", true))] };
        assert!(!confusion_check(ConfusionInput::Deductions(&one)));
        assert!(!confusion_check(ConfusionInput::Deductions(&DeductionStep::default())));
    }

    #[test]
    fn confusion_on_competing_explanations() {
        let kb = cow_kb();
        let q = rel("chases", c("cow"), c("lion"), true);
        let sel = rule_select_backward(std::slice::from_ref(&q), &kb).unwrap();
        let sets = logic_abduce(&sel, &kb).unwrap();
        assert!(confusion_check(ConfusionInput::Abductions(&sets)));
        assert!(!confusion_check(ConfusionInput::Abductions(&sets[..1])));
    }
}
