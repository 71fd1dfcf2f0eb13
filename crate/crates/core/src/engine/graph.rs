use std::collections::HashSet;

use crate::logic::{substitute, Binding, KnowledgeBase, Literal};
use crate::modules::GoalSet;

/// Backward state: the hypothesis consequent and its negation as roots,
/// every explanation abduced so far, and which goals have been expanded.
/// Alternatives for one goal are ORed; goals inside one set are ANDed.
#[derive(Debug, Clone)]
pub(crate) struct GoalGraph {
    sets: Vec<GoalSet>,
    /// Ground goals in discovery order, roots first.
    nodes: Vec<Literal>,
    known: HashSet<Literal>,
    expanded: HashSet<Literal>,
}

impl GoalGraph {
    pub fn new(q: &Literal) -> Self {
        let mut g = GoalGraph { sets: Vec::new(), nodes: Vec::new(), known: HashSet::new(), expanded: HashSet::new() };
        g.note(q.clone());
        g.note(q.negated());
        g
    }

    fn note(&mut self, l: Literal) {
        if self.known.insert(l.clone()) {
            self.nodes.push(l);
        }
    }

    pub fn sets(&self) -> &[GoalSet] {
        &self.sets
    }

    /// Adds explanations not already present; returns how many were new.
    /// Template goals are instantiated over the known constants so each
    /// instance can be expanded on its own.
    pub fn add(&mut self, sets: &[GoalSet], kb: &KnowledgeBase) -> usize {
        let mut added = 0;
        for set in sets {
            if self.sets.iter().any(|s| s.same_explanation(set)) {
                continue;
            }
            for goal in set.literals() {
                if goal.is_ground() {
                    self.note(goal.clone());
                } else {
                    for c in kb.constants() {
                        if let Ok(g) = substitute(goal, &Binding::to(c)) {
                            self.note(g);
                        }
                    }
                }
            }
            self.sets.push(set.clone());
            added += 1;
        }
        added
    }

    pub fn mark_expanded(&mut self, goals: &[Literal]) {
        self.expanded.extend(goals.iter().cloned());
    }

    /// Goals still worth expanding: not yet expanded, not a fact, and not
    /// contradicted by a fact.
    pub fn frontier(&self, kb: &KnowledgeBase) -> Vec<Literal> {
        self.nodes
            .iter()
            .filter(|l| !self.expanded.contains(*l) && !kb.contains(l) && !kb.contains(&l.negated()))
            .cloned()
            .collect()
    }

    /// Goals not yet established; a forward rule concluding one of these
    /// bridges the two directions.
    pub fn open_goals(&self, kb: &KnowledgeBase) -> Vec<Literal> {
        self.nodes.iter().filter(|l| !kb.contains(l)).cloned().collect()
    }
}
