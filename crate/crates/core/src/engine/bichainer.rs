use crate::modules::{solve_goal_sets, CheckOutcome, CheckTarget, ConfusionInput, RelevantFacts};
use crate::parser::{Label, Problem};

use super::graph::GoalGraph;
use super::session::Session;
use super::trace::{Direction, SwitchReason};
use super::{check_preconditions, run_engine, single, EngineConfig, EngineError, EngineKind, Verdict};
use crate::modules::ModuleBackend;

/// Bidirectional chaining: chain forward until deductions become
/// ambiguous, then backward until explanations do, and so on, each side
/// reusing what the other found.
pub fn bichainer_prove(
    problem: &Problem,
    config: &EngineConfig,
    backend: &mut dyn ModuleBackend,
) -> Result<Verdict, EngineError> {
    check_preconditions(problem, config, backend)?;
    let h = single(problem)?;
    Ok(run_engine(EngineKind::BiChainer, &problem.kb, h, Vec::new(), &problem.meta.free_text, config, backend))
}

enum Step {
    Continue,
    Confused,
    Stalled,
}

struct State {
    relevant: RelevantFacts,
    graph: GoalGraph,
    forward_exhausted: bool,
    verdict: Label,
}

pub(super) fn run(s: &mut Session<'_>, config: &EngineConfig) -> Label {
    let h = s.hypothesis.clone();
    let relevant = s.fact_identify().unwrap_or_default();
    if s.aborted() {
        return Label::Unknown;
    }
    let first = s.fact_check(CheckTarget::Hypothesis(&h)).map_or(Label::Unknown, |c| c.label);
    if first != Label::Unknown && config.immediate_return {
        return first;
    }
    let mut st = State { relevant, graph: GoalGraph::new(&h.consequent), forward_exhausted: false, verdict: first };
    s.direction = config.start_direction;

    for _ in 0..config.max_steps {
        let step = match s.direction {
            Direction::Forward => forward_step(s, &mut st),
            Direction::Backward => backward_step(s, &mut st),
        };
        if s.aborted() {
            return Label::Unknown;
        }
        if st.verdict != Label::Unknown && config.immediate_return {
            return st.verdict;
        }
        match step {
            Step::Continue => {}
            Step::Confused => {
                if available(s, &st, s.direction.flip()) {
                    s.switch(SwitchReason::Confusion);
                    if st.verdict != Label::Unknown {
                        return st.verdict;
                    }
                }
            }
            Step::Stalled => {
                if s.direction == Direction::Forward {
                    st.forward_exhausted = true;
                }
                if !available(s, &st, s.direction.flip()) {
                    return st.verdict;
                }
                s.switch(SwitchReason::Stall);
                if st.verdict != Label::Unknown {
                    return st.verdict;
                }
            }
        }
    }
    st.verdict
}

fn available(s: &Session<'_>, st: &State, d: Direction) -> bool {
    match d {
        Direction::Forward => !st.forward_exhausted,
        Direction::Backward => !st.graph.frontier(&s.kb).is_empty(),
    }
}

fn forward_step(s: &mut Session<'_>, st: &mut State) -> Step {
    let targets = st.graph.open_goals(&s.kb);
    let Some(selection) = s.select_forward(&st.relevant, &targets) else {
        return Step::Stalled;
    };
    if selection.is_empty() {
        return Step::Stalled;
    }
    let Some((deduced, added)) = s.deduce(&st.relevant, &selection) else {
        return Step::Stalled;
    };
    if added.is_empty() {
        return Step::Stalled;
    }
    st.relevant.extend(added);
    check(s, st);
    if st.verdict != Label::Unknown {
        return Step::Continue;
    }
    match s.confusion(ConfusionInput::Deductions(&deduced)) {
        Some(true) => Step::Confused,
        _ => Step::Continue,
    }
}

fn backward_step(s: &mut Session<'_>, st: &mut State) -> Step {
    let frontier = st.graph.frontier(&s.kb);
    if frontier.is_empty() {
        return Step::Stalled;
    }
    let selection = s.select_backward(&frontier);
    st.graph.mark_expanded(&frontier);
    let Some(selection) = selection else {
        return Step::Stalled;
    };
    if selection.is_empty() {
        return Step::Stalled;
    }
    let Some(sets) = s.abduce(&selection) else {
        return Step::Stalled;
    };
    if st.graph.add(&sets, &s.kb) == 0 {
        return Step::Stalled;
    }
    check(s, st);
    if st.verdict != Label::Unknown {
        return Step::Continue;
    }
    match s.confusion(ConfusionInput::Abductions(&sets)) {
        Some(true) => Step::Confused,
        _ => Step::Continue,
    }
}

/// Fact check over the hypothesis as a disjunction of goal sets. A
/// decisive answer reached through goal sets is materialized as derived
/// facts so the trace replays.
fn check(s: &mut Session<'_>, st: &mut State) {
    let h = s.hypothesis.clone();
    let outcome = s
        .fact_check(CheckTarget::Frontier { hypothesis: &h, goal_sets: st.graph.sets() })
        .unwrap_or_else(CheckOutcome::unknown);
    let target = match outcome.label {
        Label::Unknown => return,
        Label::Proved => h.consequent.clone(),
        Label::Disproved => h.consequent.negated(),
    };
    if !s.kb.contains(&target) {
        let proof = solve_goal_sets(st.graph.sets(), &s.kb).proof(&target);
        if proof.is_empty() || !s.conclude(&proof) {
            s.warn(format!("fact check answered {} but no supporting chain was found", outcome.label));
        }
    }
    st.verdict = outcome.label;
}
