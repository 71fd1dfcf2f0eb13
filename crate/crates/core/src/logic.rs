//! Ground and template literals, single-variable unification, and the
//! knowledge base shared by every engine.
//!
//! The statement language binds at most one variable per rule ("someone" /
//! "they"), so a [`Binding`] is a single optional constant rather than a
//! general substitution map.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("template {0} contains an unbound variable")]
    UnboundVariable(Literal),
    #[error("rule {0} has no conditions")]
    EmptyConditions(RuleId),
    #[error("rule {0} uses a variable in its consequent that no condition binds")]
    UnboundConsequent(RuleId),
    #[error("derived fact {0} must cite at least one premise")]
    NoPremises(Literal),
    #[error("unknown fact id {0}")]
    UnknownFact(FactId),
    #[error("fact literal {0} is not ground")]
    NotGround(Literal),
}

/// A constant such as `cow`, or the rule-local variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entity {
    Const(String),
    Var,
}

impl Entity {
    /// Builds a constant, lowercasing the name.
    ///
    /// Panics if the name is empty or contains whitespace.
    pub fn constant(name: &str) -> Self {
        assert!(!name.is_empty() && !name.chars().any(char::is_whitespace), "invalid constant name {name:?}");
        Entity::Const(name.to_lowercase())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Entity::Var)
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            Entity::Const(c) => Some(c),
            Entity::Var => None,
        }
    }

    fn bind(&self, binding: &Binding) -> Option<Entity> {
        match self {
            Entity::Const(_) => Some(self.clone()),
            Entity::Var => binding.value().map(|c| Entity::Const(c.to_string())),
        }
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entity::Const(c) => f.write_str(c),
            Entity::Var => f.write_str("X"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    Attr { subject: Entity, adjective: String },
    Rel { verb: String, subject: Entity, object: Entity },
}

impl Atom {
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        let (a, b) = match self {
            Atom::Attr { subject, .. } => (subject, None),
            Atom::Rel { subject, object, .. } => (subject, Some(object)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn subject(&self) -> &Entity {
        match self {
            Atom::Attr { subject, .. } | Atom::Rel { subject, .. } => subject,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub polarity: Polarity,
}

impl Literal {
    pub fn attr(subject: Entity, adjective: &str, polarity: Polarity) -> Self {
        Literal { atom: Atom::Attr { subject, adjective: adjective.to_lowercase() }, polarity }
    }

    pub fn rel(verb: &str, subject: Entity, object: Entity, polarity: Polarity) -> Self {
        Literal { atom: Atom::Rel { verb: verb.to_lowercase(), subject, object }, polarity }
    }

    /// The same literal about a different subject.
    pub fn with_subject(&self, subject: Entity) -> Literal {
        let mut out = self.clone();
        match &mut out.atom {
            Atom::Attr { subject: s, .. } | Atom::Rel { subject: s, .. } => *s = subject,
        }
        out
    }

    pub fn is_positive(&self) -> bool {
        self.polarity == Polarity::Positive
    }

    pub fn negated(&self) -> Literal {
        Literal { atom: self.atom.clone(), polarity: self.polarity.flip() }
    }

    pub fn has_var(&self) -> bool {
        self.atom.entities().any(Entity::is_var)
    }

    pub fn is_ground(&self) -> bool {
        !self.has_var()
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.atom.entities().filter_map(Entity::as_const)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.polarity {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
        };
        match &self.atom {
            Atom::Attr { subject, adjective } => write!(f, "attr({subject}, {adjective}, {sign})"),
            Atom::Rel { verb, subject, object } => write!(f, "rel({verb}, {subject}, {object}, {sign})"),
        }
    }
}

/// Value of the single rule variable, if bound.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Binding(Option<String>);

impl Binding {
    pub fn empty() -> Self {
        Binding(None)
    }

    pub fn to(constant: &str) -> Self {
        Binding(Some(constant.to_string()))
    }

    pub fn value(&self) -> Option<&str> {
        self.0.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Some(c) => write!(f, "{{X={c}}}"),
            None => f.write_str("{}"),
        }
    }
}

fn unify_entity(template: &Entity, ground: &Entity, binding: &mut Binding) -> bool {
    match (template, ground) {
        (Entity::Const(a), Entity::Const(b)) => a == b,
        (Entity::Var, Entity::Const(c)) => match binding.value() {
            Some(bound) => bound == c,
            None => {
                *binding = Binding::to(c);
                true
            }
        },
        (_, Entity::Var) => false,
    }
}

/// Matches a (possibly templated) literal against a ground one.
pub fn unify(template: &Literal, ground: &Literal) -> Option<Binding> {
    unify_with(template, ground, &Binding::empty())
}

/// Like [`unify`], but extends an existing binding.
pub fn unify_with(template: &Literal, ground: &Literal, start: &Binding) -> Option<Binding> {
    if template.polarity != ground.polarity {
        return None;
    }
    let mut binding = start.clone();
    let ok = match (&template.atom, &ground.atom) {
        (Atom::Attr { subject: ts, adjective: ta }, Atom::Attr { subject: gs, adjective: ga }) => {
            ta == ga && unify_entity(ts, gs, &mut binding)
        }
        (Atom::Rel { verb: tv, subject: ts, object: to }, Atom::Rel { verb: gv, subject: gs, object: go }) => {
            tv == gv && unify_entity(ts, gs, &mut binding) && unify_entity(to, go, &mut binding)
        }
        _ => false,
    };
    ok.then_some(binding)
}

/// Instantiates a template under a binding.
pub fn substitute(template: &Literal, binding: &Binding) -> Result<Literal, LogicError> {
    let unbound = || LogicError::UnboundVariable(template.clone());
    let atom = match &template.atom {
        Atom::Attr { subject, adjective } => {
            Atom::Attr { subject: subject.bind(binding).ok_or_else(unbound)?, adjective: adjective.clone() }
        }
        Atom::Rel { verb, subject, object } => Atom::Rel {
            verb: verb.clone(),
            subject: subject.bind(binding).ok_or_else(unbound)?,
            object: object.bind(binding).ok_or_else(unbound)?,
        },
    };
    Ok(Literal { atom, polarity: template.polarity })
}

/// True iff the two literals share an atom and differ in polarity.
pub fn contradicts(a: &Literal, b: &Literal) -> bool {
    a.atom == b.atom && a.polarity != b.polarity
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactId(pub u32);

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleId(pub u32);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Position (1-based) in the problem's fact listing.
    Given {
        index: usize,
    },
    Derived {
        rule: RuleId,
        premises: Vec<FactId>,
        depth: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub id: FactId,
    pub literal: Literal,
    pub provenance: Provenance,
}

impl Fact {
    pub fn depth(&self) -> u32 {
        match &self.provenance {
            Provenance::Given { .. } => 0,
            Provenance::Derived { depth, .. } => *depth,
        }
    }

    pub fn is_given(&self) -> bool {
        matches!(self.provenance, Provenance::Given { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub id: RuleId,
    pub conditions: Vec<Literal>,
    pub consequent: Literal,
}

impl Rule {
    pub fn new(id: RuleId, conditions: Vec<Literal>, consequent: Literal) -> Result<Self, LogicError> {
        if conditions.is_empty() {
            return Err(LogicError::EmptyConditions(id));
        }
        if consequent.has_var() && !conditions.iter().any(Literal::has_var) {
            return Err(LogicError::UnboundConsequent(id));
        }
        Ok(Rule { id, conditions, consequent })
    }

    pub fn has_var(&self) -> bool {
        self.consequent.has_var() || self.conditions.iter().any(Literal::has_var)
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.conditions.iter().chain(std::iter::once(&self.consequent)).flat_map(Literal::constants)
    }

    /// Instantiated conditions under `binding`; conditions still mentioning
    /// the variable are returned as templates.
    pub fn conditions_under(&self, binding: &Binding) -> Vec<Literal> {
        self.conditions.iter().map(|c| substitute(c, binding).unwrap_or_else(|_| c.clone())).collect()
    }
}

/// Result of checking one goal literal against a fact set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entailment {
    Holds(FactId),
    NegationHolds(FactId),
    Undetermined,
}

/// One way a rule fires: the binding, the supporting facts (in condition
/// order) and the instantiated consequent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub rule: RuleId,
    pub binding: Binding,
    pub premises: Vec<FactId>,
    pub consequent: Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    Added(FactId),
    Existing(FactId),
}

impl AddOutcome {
    pub fn id(self) -> FactId {
        match self {
            AddOutcome::Added(id) | AddOutcome::Existing(id) => id,
        }
    }

    pub fn is_new(self) -> bool {
        matches!(self, AddOutcome::Added(_))
    }
}

/// Facts (deduplicated by literal, in insertion order) plus rules.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    facts: Vec<Fact>,
    index: HashMap<Literal, FactId>,
    rules: Vec<Rule>,
    constants: Vec<String>,
    known_constants: HashSet<String>,
    consistent: bool,
}

impl KnowledgeBase {
    pub fn new(rules: Vec<Rule>) -> Self {
        let mut kb = KnowledgeBase { consistent: true, ..Default::default() };
        for rule in &rules {
            let names: Vec<String> = rule.constants().map(str::to_string).collect();
            for c in names {
                kb.note_constant(&c);
            }
        }
        kb.rules = rules;
        kb
    }

    /// Builds a knowledge base from given literals (indexed from 1) and rules.
    pub fn from_parts(facts: Vec<Literal>, rules: Vec<Rule>) -> Result<Self, LogicError> {
        let mut kb = KnowledgeBase::new(rules);
        for (i, literal) in facts.into_iter().enumerate() {
            kb.add(literal, Provenance::Given { index: i + 1 })?;
        }
        Ok(kb)
    }

    fn note_constant(&mut self, c: &str) {
        if self.known_constants.insert(c.to_string()) {
            self.constants.push(c.to_string());
        }
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty() && self.rules.is_empty()
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    /// Constants in order of first appearance (facts, then rules as loaded).
    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn fact(&self, id: FactId) -> Option<&Fact> {
        (id.0 as usize).checked_sub(1).and_then(|i| self.facts.get(i))
    }

    pub fn rule(&self, id: RuleId) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn lookup(&self, literal: &Literal) -> Option<FactId> {
        self.index.get(literal).copied()
    }

    pub fn contains(&self, literal: &Literal) -> bool {
        self.index.contains_key(literal)
    }

    pub fn next_id(&self) -> FactId {
        FactId(self.facts.len() as u32 + 1)
    }

    /// Inserts a fact unless its literal is already present, in which case
    /// the earlier fact (and provenance) is kept. Derived depth is
    /// recomputed from the cited premises.
    pub fn add(&mut self, literal: Literal, provenance: Provenance) -> Result<AddOutcome, LogicError> {
        if !literal.is_ground() {
            return Err(LogicError::NotGround(literal));
        }
        if let Some(id) = self.lookup(&literal) {
            return Ok(AddOutcome::Existing(id));
        }
        let provenance = match provenance {
            Provenance::Given { index } => Provenance::Given { index },
            Provenance::Derived { rule, premises, .. } => {
                if premises.is_empty() {
                    return Err(LogicError::NoPremises(literal));
                }
                let mut depth = 0;
                for p in &premises {
                    let fact = self.fact(*p).ok_or(LogicError::UnknownFact(*p))?;
                    depth = depth.max(fact.depth());
                }
                Provenance::Derived { rule, premises, depth: depth + 1 }
            }
        };
        let id = self.next_id();
        if self.index.contains_key(&literal.negated()) {
            self.consistent = false;
        }
        let names: Vec<String> = literal.constants().map(str::to_string).collect();
        for c in names {
            self.note_constant(&c);
        }
        self.index.insert(literal.clone(), id);
        self.facts.push(Fact { id, literal, provenance });
        Ok(AddOutcome::Added(id))
    }

    pub fn add_derived(
        &mut self,
        literal: Literal,
        rule: RuleId,
        premises: Vec<FactId>,
    ) -> Result<AddOutcome, LogicError> {
        self.add(literal, Provenance::Derived { rule, premises, depth: 0 })
    }

    /// Persistent-style insertion: returns the updated knowledge base.
    pub fn with_fact(&self, literal: Literal, provenance: Provenance) -> Result<Self, LogicError> {
        let mut next = self.clone();
        next.add(literal, provenance)?;
        Ok(next)
    }

    pub fn entailed(&self, goal: &Literal) -> Entailment {
        entailed(self, goal)
    }

    /// Every binding under which all of `rule`'s conditions hold using only
    /// facts accepted by `allowed`. Bindings are enumerated in fact
    /// insertion order.
    pub fn firings(&self, rule: &Rule, allowed: impl Fn(FactId) -> bool) -> Vec<Firing> {
        let mut out = Vec::new();
        let holds = |lit: &Literal| self.lookup(lit).filter(|id| allowed(*id));
        let collect = |binding: Binding| -> Option<Firing> {
            let mut premises = Vec::with_capacity(rule.conditions.len());
            for cond in &rule.conditions {
                let ground = substitute(cond, &binding).ok()?;
                premises.push(holds(&ground)?);
            }
            let consequent = substitute(&rule.consequent, &binding).ok()?;
            Some(Firing { rule: rule.id, binding, premises, consequent })
        };
        match rule.conditions.iter().find(|c| c.has_var()) {
            None => out.extend(collect(Binding::empty())),
            Some(anchor) => {
                let mut seen = HashSet::new();
                for fact in &self.facts {
                    if !allowed(fact.id) {
                        continue;
                    }
                    if let Some(binding) = unify(anchor, &fact.literal) {
                        if seen.insert(binding.clone()) {
                            out.extend(collect(binding));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Checks a ground goal against the facts. A contradicting fact takes
/// precedence over a matching one.
pub fn entailed(kb: &KnowledgeBase, goal: &Literal) -> Entailment {
    if let Some(id) = kb.lookup(&goal.negated()) {
        return Entailment::NegationHolds(id);
    }
    match kb.lookup(goal) {
        Some(id) => Entailment::Holds(id),
        None => Entailment::Undetermined,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn c(name: &str) -> Entity {
        Entity::constant(name)
    }

    pub fn attr(s: Entity, adj: &str, pos: bool) -> Literal {
        Literal::attr(s, adj, if pos { Polarity::Positive } else { Polarity::Negative })
    }

    pub fn rel(verb: &str, s: Entity, o: Entity, pos: bool) -> Literal {
        Literal::rel(verb, s, o, if pos { Polarity::Positive } else { Polarity::Negative })
    }

    #[test]
    fn unify_binds_variable() {
        let b = unify(&attr(Entity::Var, "blue", true), &attr(c("cow"), "blue", true));
        assert_eq!(b, Some(Binding::to("cow")));
    }

    #[test]
    fn unify_ground_identity_gives_empty_binding() {
        let l = attr(c("cow"), "blue", true);
        assert_eq!(unify(&l, &l), Some(Binding::empty()));
    }

    #[test]
    fn unify_rejects_polarity_mismatch() {
        assert_eq!(unify(&attr(Entity::Var, "blue", true), &attr(c("cow"), "blue", false)), None);
    }

    #[test]
    fn unify_requires_consistent_variable() {
        let t = rel("chases", Entity::Var, Entity::Var, true);
        assert_eq!(unify(&t, &rel("chases", c("cow"), c("cow"), true)), Some(Binding::to("cow")));
        assert_eq!(unify(&t, &rel("chases", c("cow"), c("lion"), true)), None);
    }

    #[test]
    fn unify_rejects_shape_mismatch() {
        assert_eq!(unify(&attr(Entity::Var, "blue", true), &rel("blue", c("cow"), c("cow"), true)), None);
    }

    #[test]
    fn substitute_instantiates_template() {
        let t = rel("chases", Entity::Var, c("tiger"), true);
        assert_eq!(substitute(&t, &Binding::to("cow")).unwrap(), rel("chases", c("cow"), c("tiger"), true));
    }

    #[test]
    fn substitute_ground_is_noop() {
        let g = rel("eats", c("tiger"), c("squirrel"), false);
        assert_eq!(substitute(&g, &Binding::empty()).unwrap(), g);
    }

    #[test]
    fn substitute_reports_unbound_variable() {
        let t = attr(Entity::Var, "rough", true);
        assert!(matches!(substitute(&t, &Binding::empty()), Err(LogicError::UnboundVariable(_))));
    }

    #[test]
    fn contradiction_cases() {
        let pos = attr(c("cow"), "blue", true);
        assert!(contradicts(&pos, &attr(c("cow"), "blue", false)));
        assert!(!contradicts(&pos, &pos));
        assert!(!contradicts(&pos, &attr(c("bear"), "blue", false)));
    }

    #[test]
    fn entailed_cases() {
        let kb = KnowledgeBase::from_parts(vec![attr(c("cow"), "blue", true)], vec![]).unwrap();
        assert_eq!(kb.entailed(&attr(c("cow"), "blue", true)), Entailment::Holds(FactId(1)));
        assert_eq!(kb.entailed(&attr(c("cow"), "blue", false)), Entailment::NegationHolds(FactId(1)));
        let empty = KnowledgeBase::new(vec![]);
        assert_eq!(empty.entailed(&attr(c("cow"), "blue", true)), Entailment::Undetermined);
    }

    #[test]
    fn entailed_prefers_negation_when_inconsistent() {
        let kb = KnowledgeBase::from_parts(vec![attr(c("cow"), "blue", true), attr(c("cow"), "blue", false)], vec![])
            .unwrap();
        assert!(!kb.is_consistent());
        assert_eq!(kb.entailed(&attr(c("cow"), "blue", true)), Entailment::NegationHolds(FactId(2)));
    }

    #[test]
    fn kb_add_semantics() {
        let kb = KnowledgeBase::from_parts(vec![attr(c("cow"), "blue", true)], vec![]).unwrap();
        let dup = kb.with_fact(attr(c("cow"), "blue", true), Provenance::Given { index: 9 }).unwrap();
        assert_eq!(dup.len(), 1);
        assert_eq!(dup.facts()[0].provenance, Provenance::Given { index: 1 });
        let fresh = kb.with_fact(attr(c("cow"), "red", true), Provenance::Given { index: 2 }).unwrap();
        assert_eq!(fresh.len(), 2);
        assert!(fresh.is_consistent());
        let neg = kb.with_fact(attr(c("cow"), "blue", false), Provenance::Given { index: 2 }).unwrap();
        assert!(!neg.is_consistent());
        assert!(kb.is_consistent());
    }

    #[test]
    fn derived_depth_is_one_past_premises() {
        let mut kb = KnowledgeBase::from_parts(vec![attr(c("cow"), "blue", true)], vec![]).unwrap();
        let a = kb.add_derived(attr(c("cow"), "red", true), RuleId(1), vec![FactId(1)]).unwrap();
        let b = kb.add_derived(attr(c("cow"), "big", true), RuleId(2), vec![FactId(1), a.id()]).unwrap();
        assert_eq!(kb.fact(a.id()).unwrap().depth(), 1);
        assert_eq!(kb.fact(b.id()).unwrap().depth(), 2);
        assert!(matches!(
            kb.add_derived(attr(c("cow"), "odd", true), RuleId(2), vec![]),
            Err(LogicError::NoPremises(_))
        ));
    }

    #[test]
    fn rule_invariants() {
        let r = Rule::new(RuleId(1), vec![attr(c("cow"), "blue", true)], attr(Entity::Var, "red", true));
        assert!(matches!(r, Err(LogicError::UnboundConsequent(_))));
        assert!(matches!(
            Rule::new(RuleId(1), vec![], attr(c("cow"), "red", true)),
            Err(LogicError::EmptyConditions(_))
        ));
    }

    #[test]
    fn firings_enumerate_bindings_in_fact_order() {
        let rule =
            Rule::new(RuleId(1), vec![attr(Entity::Var, "blue", true)], rel("chases", Entity::Var, c("tiger"), true))
                .unwrap();
        let kb = KnowledgeBase::from_parts(
            vec![attr(c("bear"), "blue", true), attr(c("cow"), "blue", true)],
            vec![rule.clone()],
        )
        .unwrap();
        let f = kb.firings(&rule, |_| true);
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].binding, Binding::to("bear"));
        assert_eq!(f[1].premises, vec![FactId(2)]);
        assert!(kb.firings(&rule, |id| id == FactId(2)).len() == 1);
    }
}
