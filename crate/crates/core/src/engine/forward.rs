use crate::modules::{CheckTarget, ModuleBackend, RelevantFacts, RuleSelection};
use crate::parser::{Label, Problem};

use super::session::Session;
use super::{check_preconditions, run_engine, single, EngineConfig, EngineError, EngineKind, Verdict};

/// Forward-only baseline: select, infer, check, repeat. Selection looks at
/// every fact, with no preference for rules that reach the hypothesis, and
/// each iteration draws its inference from the first selected rule.
pub fn si_forward_prove(
    problem: &Problem,
    config: &EngineConfig,
    backend: &mut dyn ModuleBackend,
) -> Result<Verdict, EngineError> {
    check_preconditions(problem, config, backend)?;
    let h = single(problem)?;
    Ok(run_engine(EngineKind::Forward, &problem.kb, h, Vec::new(), &problem.meta.free_text, config, backend))
}

pub(super) fn run(s: &mut Session<'_>, config: &EngineConfig) -> Label {
    let h = s.hypothesis.clone();
    for _ in 0..config.max_steps {
        let everything = RelevantFacts::all(&s.kb);
        let mut progressed = false;
        if let Some(selection) = s.select_forward(&everything, &[]) {
            if let Some(&first) = selection.rules.first() {
                let one = RuleSelection { rules: vec![first], bridge: None };
                if let Some((_, added)) = s.deduce(&everything, &one) {
                    progressed = !added.is_empty();
                }
            }
        }
        if s.aborted() {
            return Label::Unknown;
        }
        let label = s.fact_check(CheckTarget::Hypothesis(&h)).map_or(Label::Unknown, |c| c.label);
        if label != Label::Unknown {
            return label;
        }
        if !progressed || s.aborted() {
            return Label::Unknown;
        }
    }
    Label::Unknown
}
