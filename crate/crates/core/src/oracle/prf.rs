use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::engine::{ProofTrace, StepOutput};
use crate::logic::{FactId, RuleId};
use crate::parser::Label;

use super::ReferenceProof;

/// A statement of the problem a proof can rest on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Premise {
    Fact(FactId),
    Rule(RuleId),
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Premise::Fact(id) => id.fmt(f),
            Premise::Rule(id) => id.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PremiseScore {
    pub precision: Ratio<u64>,
    pub recall: Ratio<u64>,
}

impl PremiseScore {
    pub fn from_sets(predicted: &BTreeSet<Premise>, reference: &BTreeSet<Premise>) -> Self {
        let hit = predicted.intersection(reference).count() as u64;
        let ratio = |den: usize| {
            if den == 0 {
                Ratio::from_integer(u64::from(reference.is_empty()))
            } else {
                Ratio::new(hit, den as u64)
            }
        };
        PremiseScore {
            precision: ratio(predicted.len()),
            recall: if reference.is_empty() { Ratio::from_integer(1) } else { Ratio::new(hit, reference.len() as u64) },
        }
    }

    pub fn precision_f64(&self) -> f64 {
        *self.precision.numer() as f64 / *self.precision.denom() as f64
    }

    pub fn recall_f64(&self) -> f64 {
        *self.recall.numer() as f64 / *self.recall.denom() as f64
    }
}

/// Given facts and rules a trace relies on: the rules and non-derived
/// premises of every recorded derivation, plus the facts cited by the last
/// decisive fact check. Explanations that were only hypothesized do not
/// count.
pub fn premise_set(trace: &ProofTrace) -> BTreeSet<Premise> {
    let derived: HashSet<FactId> =
        trace.inherited.iter().filter_map(|d| d.id).chain(trace.derivations().filter_map(|(_, d)| d.id)).collect();
    let mut out = BTreeSet::new();
    for (_, d) in trace.derivations() {
        if d.id.is_none() {
            continue;
        }
        out.insert(Premise::Rule(d.rule));
        out.extend(d.premises.iter().filter(|p| !derived.contains(p)).map(|p| Premise::Fact(*p)));
    }
    let last_decisive = trace.steps.iter().rev().find_map(|s| match &s.output {
        StepOutput::Check { label, cited } if *label != Label::Unknown => Some(cited),
        _ => None,
    });
    if let Some(cited) = last_decisive {
        out.extend(cited.iter().filter(|p| !derived.contains(p)).map(|p| Premise::Fact(*p)));
    }
    out
}

/// Precision and recall of the trace's premises against the reference
/// proof, as exact fractions.
pub fn premise_prf(trace: &ProofTrace, reference: &ReferenceProof) -> PremiseScore {
    let reference: BTreeSet<Premise> = reference.premises().into_iter().collect();
    PremiseScore::from_sets(&premise_set(trace), &reference)
}
