use std::collections::HashMap;

use crate::logic::{substitute, Binding, FactId, KnowledgeBase, Literal, RuleId};

use super::GoalSet;

/// Why a literal counts as established while solving goal sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Fact(FactId),
    Rule { rule: RuleId, binding: Binding, premises: Vec<Literal> },
}

/// A conclusion reached through a goal set, ready to be added to the KB
/// once its premises are present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofStep {
    pub literal: Literal,
    pub rule: RuleId,
    pub binding: Binding,
    pub premises: Vec<Literal>,
}

/// Least fixpoint of the goal sets over the current facts.
#[derive(Debug, Clone, Default)]
pub struct GoalSolution {
    proven: HashMap<Literal, Justification>,
}

impl GoalSolution {
    pub fn holds(&self, literal: &Literal) -> bool {
        self.proven.contains_key(literal)
    }

    pub fn justification(&self, literal: &Literal) -> Option<&Justification> {
        self.proven.get(literal)
    }

    /// Rule applications establishing `target`, premises before
    /// conclusions. Empty when the target is a fact or not established.
    pub fn proof(&self, target: &Literal) -> Vec<ProofStep> {
        let mut out = Vec::new();
        let mut done = Vec::new();
        self.collect(target, &mut out, &mut done);
        out
    }

    fn collect(&self, literal: &Literal, out: &mut Vec<ProofStep>, done: &mut Vec<Literal>) {
        if done.contains(literal) {
            return;
        }
        done.push(literal.clone());
        if let Some(Justification::Rule { rule, binding, premises }) = self.proven.get(literal) {
            for p in premises {
                self.collect(p, out, done);
            }
            out.push(ProofStep {
                literal: literal.clone(),
                rule: *rule,
                binding: binding.clone(),
                premises: premises.clone(),
            });
        }
    }

    /// Given facts at the leaves of the proof of `target`.
    pub fn leaf_facts(&self, target: &Literal) -> Vec<FactId> {
        let mut out = Vec::new();
        let mut stack = vec![target.clone()];
        let mut seen = Vec::new();
        while let Some(l) = stack.pop() {
            if seen.contains(&l) {
                continue;
            }
            match self.proven.get(&l) {
                Some(Justification::Fact(id)) => {
                    if !out.contains(id) {
                        out.push(*id);
                    }
                }
                Some(Justification::Rule { premises, .. }) => {
                    stack.extend(premises.iter().rev().cloned());
                }
                None => {}
            }
            seen.push(l);
        }
        out
    }
}

/// Marks every goal-set target derivable from the facts through the sets
/// (AND within a set, OR across sets for the same target). Template goals
/// take the first constant, in order of appearance, that satisfies the
/// whole set.
pub fn solve_goal_sets(sets: &[GoalSet], kb: &KnowledgeBase) -> GoalSolution {
    let mut solution = GoalSolution::default();
    let holds = |s: &mut GoalSolution, l: &Literal| -> bool {
        if s.proven.contains_key(l) {
            return true;
        }
        match kb.lookup(l) {
            Some(id) => {
                s.proven.insert(l.clone(), Justification::Fact(id));
                true
            }
            None => false,
        }
    };
    loop {
        let mut changed = false;
        for set in sets {
            if holds(&mut solution, &set.target) {
                continue;
            }
            let candidates: Vec<Binding> = if set.is_template() {
                kb.constants().iter().map(|c| Binding::to(c)).collect()
            } else {
                vec![set.binding.clone()]
            };
            for binding in candidates {
                let premises: Option<Vec<Literal>> = set.literals().map(|g| substitute(g, &binding).ok()).collect();
                let Some(premises) = premises else { continue };
                if premises.iter().all(|p| holds(&mut solution, p)) {
                    let binding = if set.is_template() { binding } else { set.binding.clone() };
                    solution
                        .proven
                        .insert(set.target.clone(), Justification::Rule { rule: set.origin_rule, binding, premises });
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            return solution;
        }
    }
}
