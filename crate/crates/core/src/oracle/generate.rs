use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Entity, KnowledgeBase, Literal, Polarity, Rule, RuleId};
use crate::parser::{Hypothesis, Label, Problem, ProblemMeta, Query};

use super::saturate;

const CONSTANTS: &[&str] = &["bear", "cat", "cow", "dog", "lion", "mouse", "rabbit", "squirrel", "tiger", "eagle"];
const ADJECTIVES: &[&str] = &[
    "big", "blue", "cold", "green", "kind", "nice", "red", "rough", "round", "young", "white", "furry", "quiet",
    "smart",
];
const VERBS: &[&str] = &["chases", "eats", "likes", "needs", "sees", "visits"];

/// Knobs for one generated problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub target_label: Label,
    /// Minimal proof depth; ignored for Unknown.
    pub proof_depth: u32,
    pub n_constants: usize,
    pub n_adjectives: usize,
    pub n_verbs: usize,
    pub n_facts: usize,
    pub n_rules: usize,
    pub negation_rate: f64,
    /// Probability that a rule speaks about "someone" rather than named
    /// entities only.
    pub variable_rate: f64,
    /// Probability that a rule's first condition restates an earlier rule's
    /// conclusion, which is what makes deep proofs common.
    pub chain_rate: f64,
    pub seed: u64,
    pub max_attempts: usize,
}

impl InstanceSpec {
    pub fn new(target_label: Label, proof_depth: u32, seed: u64) -> Self {
        InstanceSpec {
            target_label,
            proof_depth,
            n_constants: 4,
            n_adjectives: 6,
            n_verbs: 3,
            n_facts: 8,
            n_rules: 12,
            negation_rate: 0.15,
            variable_rate: 0.5,
            chain_rate: 0.7,
            seed,
            max_attempts: 10_000,
        }
    }

    fn validate(&self) -> Result<(), GenerationError> {
        let bad = |m: &str| Err(GenerationError::InvalidSpec(m.to_string()));
        if self.proof_depth > 5 && self.target_label != Label::Unknown {
            return bad("proof depth must be at most 5");
        }
        if !(1..=CONSTANTS.len()).contains(&self.n_constants) {
            return bad("n_constants out of range");
        }
        if !(1..=ADJECTIVES.len()).contains(&self.n_adjectives) {
            return bad("n_adjectives out of range");
        }
        if !(1..=VERBS.len()).contains(&self.n_verbs) {
            return bad("n_verbs out of range");
        }
        if self.n_facts == 0 {
            return bad("n_facts must be positive");
        }
        if [self.negation_rate, self.variable_rate, self.chain_rate].iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("rates must lie in [0, 1]");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerationError {
    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),
    #[error("no acceptable instance after {0} attempts")]
    Exhausted(usize),
}

struct Vocab {
    constants: Vec<&'static str>,
    adjectives: Vec<&'static str>,
    verbs: Vec<&'static str>,
}

struct Drawer<'s> {
    rng: ChaCha8Rng,
    spec: &'s InstanceSpec,
}

impl Drawer<'_> {
    fn vocab(&mut self) -> Vocab {
        let mut pick = |pool: &[&'static str], n: usize| {
            let mut v = pool.to_vec();
            v.shuffle(&mut self.rng);
            v.truncate(n);
            v
        };
        Vocab {
            constants: pick(CONSTANTS, self.spec.n_constants),
            adjectives: pick(ADJECTIVES, self.spec.n_adjectives),
            verbs: pick(VERBS, self.spec.n_verbs),
        }
    }

    fn polarity(&mut self) -> Polarity {
        if self.rng.random_bool(self.spec.negation_rate) {
            Polarity::Negative
        } else {
            Polarity::Positive
        }
    }

    fn constant(&mut self, v: &Vocab) -> Entity {
        Entity::constant(v.constants.choose(&mut self.rng).expect("constants"))
    }

    fn literal(&mut self, v: &Vocab, subject: Entity) -> Literal {
        let polarity = self.polarity();
        if v.verbs.is_empty() || self.rng.random_bool(0.5) {
            Literal::attr(subject, v.adjectives.choose(&mut self.rng).expect("adjectives"), polarity)
        } else {
            let verb = v.verbs.choose(&mut self.rng).expect("verbs");
            let object = loop {
                let o = self.constant(v);
                if o != subject || v.constants.len() == 1 {
                    break o;
                }
            };
            Literal::rel(verb, subject, object, polarity)
        }
    }

    fn fact(&mut self, v: &Vocab) -> Literal {
        let s = self.constant(v);
        self.literal(v, s)
    }

    fn rule(&mut self, v: &Vocab, id: RuleId, earlier: &[Rule]) -> Option<Rule> {
        let n = match self.rng.random_range(0..100) {
            0..50 => 1,
            50..85 => 2,
            _ => 3,
        };
        let uses_var = self.rng.random_bool(self.spec.variable_rate);
        let mut conditions = Vec::with_capacity(n);
        for i in 0..n {
            let subject =
                if uses_var && (i == 0 || self.rng.random_bool(0.7)) { Entity::Var } else { self.constant(v) };
            let chained = if i == 0 && !earlier.is_empty() && self.rng.random_bool(self.spec.chain_rate) {
                let prev = &earlier.choose(&mut self.rng).expect("non-empty").consequent;
                Some(restate(prev, &subject))
            } else {
                None
            };
            let lit = chained.unwrap_or_else(|| self.literal(v, subject));
            conditions.push(lit);
        }
        let subject = if uses_var && self.rng.random_bool(0.85) { Entity::Var } else { self.constant(v) };
        let consequent = self.literal(v, subject);
        if conditions.iter().any(|c| c.atom == consequent.atom) {
            return None;
        }
        for (i, c) in conditions.iter().enumerate() {
            if conditions[..i].iter().any(|d| d.atom == c.atom) {
                return None;
            }
        }
        Rule::new(id, conditions, consequent).ok()
    }

    /// A chain of `len` rules, each consuming the previous conclusion about
    /// one entity, plus the facts that start it. Side conditions usually hold by
    /// a given fact.
    fn backbone(&mut self, v: &Vocab, len: usize, facts: &mut Vec<Literal>, rules: &mut Vec<Rule>) {
        let anchor = self.constant(v);
        let mut current = self.literal(v, anchor.clone());
        facts.push(current.clone());
        let mut seen = vec![current.atom.clone()];
        for _ in 0..len {
            let uses_var = self.rng.random_bool(self.spec.variable_rate);
            let subject = if uses_var { Entity::Var } else { anchor.clone() };
            let mut conditions = vec![current.with_subject(subject.clone())];
            let extra = match self.rng.random_range(0..100) {
                0..55 => 0,
                55..90 => 1,
                _ => 2,
            };
            for _ in 0..extra {
                let c = self.literal(v, subject.clone());
                let ground = c.with_subject(anchor.clone());
                if self.rng.random_bool(0.8) && !facts.iter().any(|f| f.atom == ground.atom) {
                    facts.push(ground);
                }
                conditions.push(c);
            }
            let next = self.literal(v, anchor.clone());
            if seen.contains(&next.atom) {
                return;
            }
            seen.push(next.atom.clone());
            let consequent = next.with_subject(subject);
            let Ok(rule) = Rule::new(RuleId(0), conditions, consequent) else {
                return;
            };
            if rule.conditions.iter().skip(1).any(|c| c.atom == rule.consequent.atom) {
                return;
            }
            rules.push(rule);
            current = next;
        }
    }

    fn kb(&mut self, v: &Vocab) -> Option<KnowledgeBase> {
        let mut facts: Vec<Literal> = Vec::with_capacity(self.spec.n_facts);
        let mut rules: Vec<Rule> = Vec::with_capacity(self.spec.n_rules);
        let len = match self.spec.target_label {
            Label::Unknown => self.rng.random_range(0..=3),
            _ => self.spec.proof_depth as usize,
        };
        self.backbone(v, len.min(self.spec.n_rules), &mut facts, &mut rules);
        let mut tries = 0;
        while facts.len() < self.spec.n_facts && tries < self.spec.n_facts * 20 {
            tries += 1;
            let f = self.fact(v);
            if !facts.iter().any(|g| g.atom == f.atom) {
                facts.push(f);
            }
        }
        let mut tries = 0;
        while rules.len() < self.spec.n_rules && tries < self.spec.n_rules * 20 {
            tries += 1;
            if let Some(r) = self.rule(v, RuleId(0), &rules) {
                rules.push(r);
            }
        }
        facts.shuffle(&mut self.rng);
        rules.shuffle(&mut self.rng);
        for (i, r) in rules.iter_mut().enumerate() {
            r.id = RuleId(i as u32 + 1);
        }
        KnowledgeBase::from_parts(facts, rules).ok()
    }

    fn unknown_candidates(&self, v: &Vocab, closure: &KnowledgeBase) -> Vec<Literal> {
        let mut out = Vec::new();
        for c in &v.constants {
            for a in &v.adjectives {
                out.push(Literal::attr(Entity::constant(c), a, Polarity::Positive));
            }
            for verb in &v.verbs {
                for o in v.constants.iter().filter(|o| *o != c) {
                    out.push(Literal::rel(verb, Entity::constant(c), Entity::constant(o), Polarity::Positive));
                }
            }
        }
        out.retain(|l| !closure.contains(l) && !closure.contains(&l.negated()));
        out
    }
}

/// `prev` with its subject replaced; a variable subject in `prev` stays a
/// variable only when the new rule also uses one.
fn restate(prev: &Literal, subject: &Entity) -> Literal {
    let subject = match (prev.atom.subject(), subject) {
        (Entity::Var, s) => s.clone(),
        (s, Entity::Var) => s.clone(),
        (s, _) => s.clone(),
    };
    prev.with_subject(subject)
}

/// Draws knowledge bases until one admits a hypothesis with the requested
/// gold label (and minimal proof depth). Deterministic in the seed.
pub fn generate_instance(spec: &InstanceSpec) -> Result<Problem, GenerationError> {
    spec.validate()?;
    let mut d = Drawer { rng: ChaCha8Rng::seed_from_u64(spec.seed), spec };
    for _ in 0..spec.max_attempts {
        let v = d.vocab();
        let Some(kb) = d.kb(&v) else { continue };
        let closure = saturate(&kb);
        if !closure.is_consistent() {
            continue;
        }
        let hypothesis = match spec.target_label {
            Label::Proved | Label::Disproved => {
                let Some(layer) = closure.layers().get(spec.proof_depth as usize) else {
                    continue;
                };
                let id = *layer.choose(&mut d.rng).expect("layers are non-empty");
                let lit = closure.kb().fact(id).expect("closure fact").literal.clone();
                if spec.target_label == Label::Proved {
                    lit
                } else {
                    lit.negated()
                }
            }
            Label::Unknown => {
                let candidates = d.unknown_candidates(&v, closure.kb());
                let Some(lit) = candidates.choose(&mut d.rng) else {
                    continue;
                };
                if d.rng.random_bool(0.5) {
                    lit.negated()
                } else {
                    lit.clone()
                }
            }
        };
        let depth = match spec.target_label {
            Label::Unknown => None,
            _ => Some(spec.proof_depth),
        };
        return Ok(Problem {
            kb,
            query: Query::Single(Hypothesis::new(hypothesis)),
            gold_label: Some(spec.target_label),
            meta: ProblemMeta {
                id: match depth {
                    Some(k) => format!("gen-{}-{}-d{k}", spec.seed, spec.target_label),
                    None => format!("gen-{}-{}", spec.seed, spec.target_label),
                },
                source: "generated".to_string(),
                depth,
                ..Default::default()
            },
        });
    }
    Err(GenerationError::Exhausted(spec.max_attempts))
}

/// `n` instances cycling through Proved, Disproved and Unknown, with proof
/// depths cycling through `depths`. Instance `i` uses seed `seed + i`.
pub fn generate_corpus(n: usize, depths: &[u32], seed: u64) -> Result<Vec<Problem>, GenerationError> {
    let depths = if depths.is_empty() { &[0][..] } else { depths };
    (0..n)
        .map(|i| {
            let label = Label::ALL[i % 3];
            let depth = depths[(i / 3) % depths.len()];
            generate_instance(&InstanceSpec::new(label, depth, seed.wrapping_add(i as u64)))
        })
        .collect()
}
