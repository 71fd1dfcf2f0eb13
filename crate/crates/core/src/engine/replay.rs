use thiserror::Error;

use crate::logic::{substitute, unify, unify_with, Binding, KnowledgeBase, Rule};
use crate::modules::GoalSet;
use crate::oracle::assume_condition;
use crate::parser::{render_literal, Label, Problem};

use super::trace::{Action, DerivationRecord, ProofTrace, StepOutput};

/// Where replay stopped. `step` is the trace index, or `None` for the facts
/// inherited from earlier options and for the final label.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}: {reason}", step.map_or_else(|| "trace".to_string(), |s| format!("step {s}")))]
pub struct ReplayError {
    pub step: Option<usize>,
    pub reason: String,
}

fn fail(step: Option<usize>, reason: impl Into<String>) -> ReplayError {
    ReplayError { step, reason: reason.into() }
}

/// Binding under which the rule's conditions match the cited premises, in
/// order.
pub(crate) fn binding_from_premises(rule: &Rule, premises: &[&crate::logic::Literal]) -> Option<Binding> {
    let mut binding = Binding::empty();
    for (cond, lit) in rule.conditions.iter().zip(premises) {
        binding = unify_with(cond, lit, &binding)?;
    }
    Some(binding)
}

fn check_derivation(kb: &mut KnowledgeBase, d: &DerivationRecord) -> Result<(), String> {
    let Some(id) = d.id else {
        return Err(format!("{} was claimed without admissible premises", render_literal(&d.literal)));
    };
    if kb.contains(&d.literal) {
        return Err(format!("{} was already known", render_literal(&d.literal)));
    }
    let rule = kb.rule(d.rule).ok_or_else(|| format!("unknown rule {}", d.rule))?.clone();
    if d.premises.len() != rule.conditions.len() {
        return Err(format!(
            "{} has {} conditions but {} premises are cited",
            d.rule,
            rule.conditions.len(),
            d.premises.len()
        ));
    }
    let mut lits = Vec::with_capacity(d.premises.len());
    for p in &d.premises {
        lits.push(&kb.fact(*p).ok_or_else(|| format!("premise {p} is not a known fact"))?.literal);
    }
    let mut binding = binding_from_premises(&rule, &lits)
        .ok_or_else(|| format!("premises do not satisfy the conditions of {}", d.rule))?;
    if binding.is_empty() {
        binding = d.binding.clone();
    } else if !d.binding.is_empty() && binding != d.binding {
        return Err(format!("recorded binding {} disagrees with premises ({binding})", d.binding));
    }
    let concluded = substitute(&rule.consequent, &binding).map_err(|e| e.to_string())?;
    if concluded != d.literal {
        return Err(format!("{} concludes {}, not {}", d.rule, render_literal(&concluded), render_literal(&d.literal)));
    }
    let added = kb.add_derived(d.literal.clone(), d.rule, d.premises.clone()).map_err(|e| e.to_string())?.id();
    if added != id {
        return Err(format!("fact numbering diverged: expected {id}, replay assigned {added}"));
    }
    Ok(())
}

fn check_goal_set(kb: &KnowledgeBase, set: &GoalSet) -> Result<(), String> {
    let rule = kb.rule(set.origin_rule).ok_or_else(|| format!("unknown rule {}", set.origin_rule))?;
    let binding = unify(&rule.consequent, &set.target)
        .ok_or_else(|| format!("{} does not conclude {}", set.origin_rule, render_literal(&set.target)))?;
    if binding != set.binding {
        return Err(format!("recorded unifier {} should be {binding}", set.binding));
    }
    let expected = rule.conditions_under(&binding);
    if !set.literals().eq(expected.iter()) {
        return Err(format!("goals do not match the conditions of {}", set.origin_rule));
    }
    Ok(())
}

/// Re-derives every recorded conclusion from the problem, checks every
/// recorded explanation against its rule, and checks the final label
/// against the replayed facts.
pub fn replay_validate(trace: &ProofTrace, problem: &Problem) -> Result<(), ReplayError> {
    replay(trace, &problem.kb).map(|_| ())
}

pub(crate) fn replay(trace: &ProofTrace, base: &KnowledgeBase) -> Result<KnowledgeBase, ReplayError> {
    let mut kb = base.clone();
    for d in &trace.inherited {
        check_derivation(&mut kb, d).map_err(|r| fail(None, format!("inherited fact: {r}")))?;
    }
    let mut kb = assume_condition(&kb, &trace.hypothesis);
    let mut last_check: Option<(usize, Label)> = None;
    let mut concluded_after_check = false;
    for step in &trace.steps {
        let at = Some(step.index);
        match &step.output {
            StepOutput::Derivations { derivations } => {
                for d in derivations {
                    check_derivation(&mut kb, d).map_err(|r| fail(at, r))?;
                }
                if step.action == Action::Conclude {
                    concluded_after_check = true;
                }
            }
            StepOutput::GoalSets { sets } => {
                for set in sets {
                    check_goal_set(&kb, set).map_err(|r| fail(at, r))?;
                }
            }
            StepOutput::Selection { rules, bridge: Some(b) } => {
                if !rules.contains(b) {
                    return Err(fail(at, format!("bridge {b} is not among the selected rules")));
                }
            }
            StepOutput::Check { label, .. } => {
                last_check = Some((step.index, *label));
                concluded_after_check = false;
            }
            _ => {}
        }
    }
    let q = &trace.hypothesis.consequent;
    let (has_q, has_not_q) = (kb.contains(q), kb.contains(&q.negated()));
    let consistent = match trace.label {
        Label::Proved => has_q,
        Label::Disproved => has_not_q,
        Label::Unknown => !has_q && !has_not_q,
    };
    if !consistent {
        return Err(fail(None, format!("label {} is not supported by the replayed facts", trace.label)));
    }
    if let Some((index, label)) = last_check {
        if trace.label != Label::Unknown && !concluded_after_check && label != trace.label {
            return Err(fail(
                Some(index),
                format!("last fact check said {label} but the trace ends with {}", trace.label),
            ));
        }
    }
    Ok(kb)
}
