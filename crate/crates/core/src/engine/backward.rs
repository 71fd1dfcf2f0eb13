use std::collections::{HashMap, HashSet};

use crate::logic::{substitute, Binding, Literal};
use crate::modules::{CheckTarget, GoalSet, ModuleBackend, ProofStep};
use crate::parser::{Hypothesis, Label, Problem};

use super::session::Session;
use super::trace::Direction;
use super::{check_preconditions, run_engine, single, EngineConfig, EngineError, EngineKind, Verdict};

/// Backward-only baseline: depth-first AND-OR search from the hypothesis,
/// shorter rules first, with backtracking and iterative deepening up to the
/// step budget.
pub fn lambada_backward_prove(
    problem: &Problem,
    config: &EngineConfig,
    backend: &mut dyn ModuleBackend,
) -> Result<Verdict, EngineError> {
    check_preconditions(problem, config, backend)?;
    let h = single(problem)?;
    Ok(run_engine(EngineKind::Backward, &problem.kb, h, Vec::new(), &problem.meta.free_text, config, backend))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Proved,
    Disproved,
    /// Not established. `cutoff`: the depth limit pruned part of the
    /// search; `looped`: an ancestor goal was met again.
    Failed {
        cutoff: bool,
        looped: bool,
    },
}

impl Outcome {
    const CLEAN: Outcome = Outcome::Failed { cutoff: false, looped: false };

    fn merge(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::Failed { cutoff: a, looped: b }, Outcome::Failed { cutoff: c, looped: d }) => {
                Outcome::Failed { cutoff: a || c, looped: b || d }
            }
            (Outcome::Failed { .. }, _) => self,
            (x, _) => x,
        }
    }

    fn cutoff(self) -> bool {
        matches!(self, Outcome::Failed { cutoff: true, .. })
    }
}

struct Search {
    stack: Vec<Literal>,
    /// Goals that failed with nothing pruned: unprovable for good.
    refuted: HashSet<Literal>,
    /// Goals that failed with this much depth left in the current round.
    shallow: HashMap<Literal, usize>,
}

pub(super) fn run(s: &mut Session<'_>, config: &EngineConfig) -> Label {
    s.direction = Direction::Backward;
    let q = s.hypothesis.consequent.clone();
    let mut search = Search { stack: Vec::new(), refuted: HashSet::new(), shallow: HashMap::new() };
    for bound in 1..=config.max_steps {
        search.shallow.clear();
        let label = check(s, &q);
        if label != Label::Unknown || s.aborted() {
            return label;
        }
        // Sign agreement: explanations for the hypothesis and for its
        // negation are selected together.
        let roots = [q.clone(), q.negated()];
        let Some(selection) = s.select_backward(&roots) else {
            return Label::Unknown;
        };
        if selection.is_empty() {
            return Label::Unknown;
        }
        let Some(sets) = s.abduce(&selection) else {
            return Label::Unknown;
        };
        let mut acc = Outcome::CLEAN;
        for root in &roots {
            let mut candidates: Vec<&GoalSet> = sets.iter().filter(|g| g.target == *root).collect();
            candidates.sort_by_key(|g| (g.goals.len(), g.origin_rule));
            search.stack.push(root.clone());
            for set in candidates {
                if set.is_failed() {
                    continue;
                }
                match prove_set(s, &mut search, set, bound - 1) {
                    Ok(step) => {
                        s.conclude(&[step]);
                        return if *root == q { Label::Proved } else { Label::Disproved };
                    }
                    Err(_) if s.aborted() => return Label::Unknown,
                    Err(o) => acc = acc.merge(o),
                }
            }
            search.stack.pop();
        }
        if !acc.cutoff() {
            return Label::Unknown;
        }
    }
    Label::Unknown
}

fn prove_goal(s: &mut Session<'_>, search: &mut Search, goal: &Literal, remaining: usize) -> Outcome {
    if search.refuted.contains(goal) {
        return Outcome::CLEAN;
    }
    if search.shallow.get(goal).is_some_and(|r| remaining <= *r) {
        return Outcome::Failed { cutoff: true, looped: false };
    }
    if search.stack.contains(goal) {
        return Outcome::Failed { cutoff: false, looped: true };
    }
    match check(s, goal) {
        Label::Proved => return Outcome::Proved,
        Label::Disproved => return Outcome::Disproved,
        Label::Unknown => {}
    }
    if s.aborted() {
        return Outcome::CLEAN;
    }
    if remaining == 0 {
        return Outcome::Failed { cutoff: true, looped: false };
    }
    let Some(selection) = s.select_backward(std::slice::from_ref(goal)) else {
        return Outcome::CLEAN;
    };
    let mut sets = if selection.is_empty() {
        Vec::new()
    } else {
        match s.abduce(&selection) {
            Some(sets) => sets,
            None => return Outcome::CLEAN,
        }
    };
    sets.sort_by_key(|g| (g.goals.len(), g.origin_rule));
    search.stack.push(goal.clone());
    let mut acc = Outcome::CLEAN;
    for set in sets.iter().filter(|g| !g.is_failed()) {
        match prove_set(s, search, set, remaining - 1) {
            Ok(step) => {
                search.stack.pop();
                s.conclude(&[step]);
                return Outcome::Proved;
            }
            Err(o) => acc = acc.merge(o),
        }
        if s.aborted() {
            break;
        }
    }
    search.stack.pop();
    match acc {
        Outcome::Failed { cutoff: false, looped: false } if !s.aborted() => {
            search.refuted.insert(goal.clone());
        }
        Outcome::Failed { cutoff: true, looped: false } => {
            let r = search.shallow.entry(goal.clone()).or_insert(remaining);
            *r = (*r).max(remaining);
        }
        _ => {}
    }
    acc
}

/// Proves every goal of one explanation. Template sets try each constant
/// in order of appearance until one satisfies the whole set.
fn prove_set(s: &mut Session<'_>, search: &mut Search, set: &GoalSet, remaining: usize) -> Result<ProofStep, Outcome> {
    let bindings: Vec<Binding> = if set.is_template() {
        s.kb.constants().iter().map(|c| Binding::to(c)).collect()
    } else {
        vec![set.binding.clone()]
    };
    let mut acc = Outcome::CLEAN;
    'bindings: for binding in bindings {
        let goals: Option<Vec<Literal>> = set.literals().map(|g| substitute(g, &binding).ok()).collect();
        let Some(goals) = goals else { continue };
        for goal in &goals {
            match prove_goal(s, search, goal, remaining) {
                Outcome::Proved => {}
                Outcome::Disproved => continue 'bindings,
                failed => {
                    acc = acc.merge(failed);
                    if s.aborted() {
                        return Err(acc);
                    }
                    continue 'bindings;
                }
            }
        }
        return Ok(ProofStep { literal: set.target.clone(), rule: set.origin_rule, binding, premises: goals });
    }
    Err(acc)
}

fn check(s: &mut Session<'_>, goal: &Literal) -> Label {
    let h = Hypothesis::new(goal.clone());
    s.fact_check(CheckTarget::Hypothesis(&h)).map_or(Label::Unknown, |c| c.label)
}
