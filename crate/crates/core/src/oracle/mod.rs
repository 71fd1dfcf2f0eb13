//! Ground truth: breadth-layered saturation, gold labels with minimal
//! reference proofs, premise precision/recall, and the instance generator.

mod generate;
mod prf;

use std::collections::HashMap;

use crate::logic::{Binding, Entailment, FactId, KnowledgeBase, Literal, Provenance, RuleId};
use crate::parser::{Hypothesis, Label, Problem};

pub use generate::{generate_corpus, generate_instance, GenerationError, InstanceSpec};
pub use prf::{premise_prf, premise_set, Premise, PremiseScore};

/// One way to derive a closure fact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternative {
    pub rule: RuleId,
    pub binding: Binding,
    pub premises: Vec<FactId>,
}

/// Every derivable fact, each at its minimal depth, with all the rule
/// applications that produce it.
#[derive(Debug, Clone)]
pub struct Closure {
    kb: KnowledgeBase,
    alternatives: HashMap<FactId, Vec<Alternative>>,
    layers: Vec<Vec<FactId>>,
}

impl Closure {
    /// The saturated knowledge base. Derived facts carry their preferred
    /// minimal derivation as provenance.
    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn layers(&self) -> &[Vec<FactId>] {
        &self.layers
    }

    pub fn is_consistent(&self) -> bool {
        self.kb.is_consistent()
    }

    pub fn contains(&self, literal: &Literal) -> bool {
        self.kb.contains(literal)
    }

    pub fn depth_of(&self, literal: &Literal) -> Option<u32> {
        self.kb.lookup(literal).and_then(|id| self.kb.fact(id)).map(|f| f.depth())
    }

    pub fn alternatives(&self, id: FactId) -> &[Alternative] {
        self.alternatives.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn max_depth(&self) -> u32 {
        self.layers.len().saturating_sub(1) as u32
    }
}

/// Forward closure in breadth-first layers: layer k holds exactly the facts
/// whose shortest derivation has k rule applications.
pub fn saturate(kb: &KnowledgeBase) -> Closure {
    let mut kb = kb.clone();
    let mut layers = vec![kb.facts().iter().map(|f| f.id).collect::<Vec<_>>()];
    loop {
        let visible = kb.len() as u32;
        let mut fresh: Vec<(Literal, Alternative)> = Vec::new();
        for rule in kb.rules() {
            for firing in kb.firings(rule, |id| id.0 <= visible) {
                if kb.contains(&firing.consequent) {
                    continue;
                }
                let alt = Alternative { rule: firing.rule, binding: firing.binding, premises: firing.premises };
                match fresh.iter_mut().find(|(l, _)| *l == firing.consequent) {
                    // Rules are visited in id order, so only premise ids can
                    // improve on an earlier candidate.
                    Some((_, best)) if alt.rule == best.rule && alt.premises < best.premises => *best = alt,
                    Some(_) => {}
                    None => fresh.push((firing.consequent, alt)),
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        let mut layer = Vec::with_capacity(fresh.len());
        for (literal, alt) in fresh {
            let id = kb.add_derived(literal, alt.rule, alt.premises).expect("premises are closure facts").id();
            layer.push(id);
        }
        layers.push(layer);
    }
    let mut alternatives: HashMap<FactId, Vec<Alternative>> = HashMap::new();
    for rule in kb.rules() {
        for firing in kb.firings(rule, |_| true) {
            let id = kb.lookup(&firing.consequent).expect("closure is a fixpoint");
            alternatives.entry(id).or_default().push(Alternative {
                rule: firing.rule,
                binding: firing.binding,
                premises: firing.premises,
            });
        }
    }
    Closure { kb, alternatives, layers }
}

/// One rule application in a reference proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofNode {
    pub fact: FactId,
    pub literal: Literal,
    pub rule: RuleId,
    pub binding: Binding,
    pub premises: Vec<FactId>,
}

/// Minimal-depth derivation of the decided literal. Fact ids refer to the
/// closure, whose given facts share ids with the problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceProof {
    pub target: Literal,
    pub depth: u32,
    /// Rule applications, premises before conclusions.
    pub steps: Vec<ProofNode>,
    /// Given facts at the leaves, ascending.
    pub leaves: Vec<FactId>,
}

impl ReferenceProof {
    pub fn rules(&self) -> Vec<RuleId> {
        let mut rules: Vec<RuleId> = self.steps.iter().map(|s| s.rule).collect();
        rules.sort();
        rules.dedup();
        rules
    }

    pub fn premises(&self) -> Vec<Premise> {
        let mut out: Vec<Premise> = self.leaves.iter().map(|f| Premise::Fact(*f)).collect();
        out.extend(self.rules().into_iter().map(Premise::Rule));
        out
    }
}

fn extract_proof(closure: &Closure, target: FactId) -> ReferenceProof {
    let kb = closure.kb();
    let mut steps = Vec::new();
    let mut leaves = Vec::new();
    let mut done = Vec::new();
    fn walk(
        closure: &Closure,
        id: FactId,
        steps: &mut Vec<ProofNode>,
        leaves: &mut Vec<FactId>,
        done: &mut Vec<FactId>,
    ) {
        if done.contains(&id) {
            return;
        }
        done.push(id);
        let fact = closure.kb().fact(id).expect("closure fact");
        match &fact.provenance {
            Provenance::Given { .. } => leaves.push(id),
            Provenance::Derived { rule, premises, .. } => {
                for p in premises {
                    walk(closure, *p, steps, leaves, done);
                }
                let binding = closure
                    .alternatives(id)
                    .iter()
                    .find(|a| a.rule == *rule && a.premises == *premises)
                    .map(|a| a.binding.clone())
                    .expect("provenance is one of the alternatives");
                steps.push(ProofNode {
                    fact: id,
                    literal: fact.literal.clone(),
                    rule: *rule,
                    binding,
                    premises: premises.clone(),
                });
            }
        }
    }
    walk(closure, target, &mut steps, &mut leaves, &mut done);
    leaves.sort();
    ReferenceProof {
        target: kb.fact(target).expect("closure fact").literal.clone(),
        depth: kb.fact(target).expect("closure fact").depth(),
        steps,
        leaves,
    }
}

#[derive(Debug, Clone)]
pub struct OracleVerdict {
    pub label: Label,
    pub proof: Option<ReferenceProof>,
    pub consistent: bool,
    pub closure: Closure,
}

/// The knowledge base with the hypothesis condition asserted as given facts
/// numbered after the problem's own.
pub fn assume_condition(kb: &KnowledgeBase, hypothesis: &Hypothesis) -> KnowledgeBase {
    let mut kb = kb.clone();
    let base = kb.facts().iter().filter(|f| f.is_given()).count();
    for (i, literal) in hypothesis.condition.iter().enumerate() {
        kb.add(literal.clone(), Provenance::Given { index: base + i + 1 }).expect("hypothesis conditions are ground");
    }
    kb
}

/// Gold label of one hypothesis. A derivable negation takes precedence,
/// matching fact check.
pub fn oracle_label_for(kb: &KnowledgeBase, hypothesis: &Hypothesis) -> OracleVerdict {
    let closure = saturate(&assume_condition(kb, hypothesis));
    let (label, decided) = match closure.kb().entailed(&hypothesis.consequent) {
        Entailment::Holds(id) => (Label::Proved, Some(id)),
        Entailment::NegationHolds(id) => (Label::Disproved, Some(id)),
        Entailment::Undetermined => (Label::Unknown, None),
    };
    OracleVerdict {
        label,
        proof: decided.map(|id| extract_proof(&closure, id)),
        consistent: closure.is_consistent(),
        closure,
    }
}

/// Gold label of a single-hypothesis problem; `None` for option lists.
pub fn oracle_label(problem: &Problem) -> Option<OracleVerdict> {
    problem.hypothesis().map(|h| oracle_label_for(&problem.kb, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::tests::{attr, c, rel};
    use crate::parser::{parse_problem_text, ParseOptions};

    fn load(text: &str) -> Problem {
        parse_problem_text(text, ParseOptions::default()).unwrap()
    }

    #[test]
    fn squirrel_chain_depths() {
        let p = load(include_str!("../../fixtures/squirrel_blue.pw"));
        let cl = saturate(&p.kb);
        assert_eq!(cl.depth_of(&attr(c("tiger"), "blue", true)), Some(1));
        assert_eq!(cl.depth_of(&rel("eats", c("tiger"), c("squirrel"), true)), Some(2));
        assert_eq!(cl.depth_of(&attr(c("squirrel"), "green", true)), Some(3));
        assert_eq!(cl.depth_of(&attr(c("squirrel"), "blue", true)), Some(4));
    }

    #[test]
    fn closure_is_a_fixpoint() {
        let p = load(include_str!("../../fixtures/squirrel_blue.pw"));
        let cl = saturate(&p.kb);
        for rule in cl.kb().rules() {
            for f in cl.kb().firings(rule, |_| true) {
                assert!(cl.contains(&f.consequent));
            }
        }
    }

    #[test]
    fn no_rules_means_no_growth() {
        let kb = KnowledgeBase::from_parts(vec![attr(c("cow"), "blue", true)], vec![]).unwrap();
        let cl = saturate(&kb);
        assert_eq!(cl.kb().len(), 1);
        assert_eq!(cl.layers().len(), 1);
    }

    #[test]
    fn cow_reference_proof() {
        let p = load(include_str!("../../fixtures/cow_chases_bear.pw"));
        let v = oracle_label(&p).unwrap();
        assert_eq!(v.label, Label::Proved);
        let proof = v.proof.unwrap();
        assert_eq!(proof.rules(), vec![RuleId(2), RuleId(6), RuleId(7), RuleId(9)]);
        assert_eq!(proof.leaves, vec![FactId(4), FactId(10)]);
        assert_eq!(proof.depth, 4);
        let order: Vec<RuleId> = proof.steps.iter().map(|s| s.rule).collect();
        assert_eq!(order, vec![RuleId(2), RuleId(9), RuleId(7), RuleId(6)]);
    }

    #[test]
    fn cow_likes_tiger_is_unknown() {
        let p = load(include_str!("../../fixtures/cow_likes_tiger.pw"));
        let v = oracle_label(&p).unwrap();
        assert_eq!(v.label, Label::Unknown);
        assert!(v.proof.is_none());
    }

    #[test]
    fn given_fact_has_single_leaf_proof() {
        let kb = KnowledgeBase::from_parts(vec![attr(c("cow"), "blue", true)], vec![]).unwrap();
        let v = oracle_label_for(&kb, &Hypothesis::new(attr(c("cow"), "blue", true)));
        let proof = v.proof.unwrap();
        assert!(proof.steps.is_empty());
        assert_eq!(proof.leaves, vec![FactId(1)]);
    }

    #[test]
    fn bear_is_big_so_not_big_is_disproved() {
        let p = load(include_str!("../../fixtures/bear_not_big.pw"));
        let v = oracle_label(&p).unwrap();
        assert_eq!(v.label, Label::Disproved);
        assert_eq!(v.proof.unwrap().rules(), vec![RuleId(5)]);
    }
}
