use std::collections::HashMap;

use crate::logic::FactId;
use crate::modules::ModuleBackend;
use crate::parser::{Label, Problem, Query};

use super::trace::DerivationRecord;
use super::{check_preconditions, run_engine, EngineConfig, EngineError, EngineKind, Verdict};

#[derive(Debug, Clone)]
pub struct OptionsOutcome {
    /// 1-based index of the first option proved, if any.
    pub chosen: Option<usize>,
    pub verdicts: Vec<Verdict>,
}

/// Evaluates the options in order. Facts derived while checking one option
/// stay available for the next, except those resting on that option's own
/// condition.
pub fn evaluate_options(
    problem: &Problem,
    config: &EngineConfig,
    kind: EngineKind,
    backend: &mut dyn ModuleBackend,
) -> Result<OptionsOutcome, EngineError> {
    check_preconditions(problem, config, backend)?;
    let options = match &problem.query {
        Query::Options(os) if !os.is_empty() => os,
        Query::Options(_) => return Err(EngineError::NoOptions),
        Query::Single(_) => return Err(EngineError::NoOptions),
    };
    let mut shared = problem.kb.clone();
    let mut inherited: Vec<DerivationRecord> = Vec::new();
    let mut verdicts = Vec::with_capacity(options.len());
    for h in options {
        let verdict = run_engine(kind, &shared, h, inherited.clone(), &problem.meta.free_text, config, backend);
        // Session ids coincide with shared ids up to the shared length;
        // anything after that is a condition fact or a new derivation.
        let mut remap: HashMap<FactId, FactId> = shared.facts().iter().map(|f| (f.id, f.id)).collect();
        for (_, d) in verdict.trace.derivations() {
            let Some(old) = d.id else { continue };
            let premises: Option<Vec<FactId>> = d.premises.iter().map(|p| remap.get(p).copied()).collect();
            let Some(premises) = premises else { continue };
            if shared.contains(&d.literal) {
                continue;
            }
            let Ok(added) = shared.add_derived(d.literal.clone(), d.rule, premises.clone()) else {
                continue;
            };
            remap.insert(old, added.id());
            inherited.push(DerivationRecord {
                id: Some(added.id()),
                literal: d.literal.clone(),
                rule: d.rule,
                binding: d.binding.clone(),
                premises,
            });
        }
        verdicts.push(verdict);
    }
    let chosen = verdicts.iter().position(|v| v.label == Label::Proved).map(|i| i + 1);
    Ok(OptionsOutcome { chosen, verdicts })
}
