//! Sentence grammar for the restricted English fragment.
//!
//! Facts: `The X is [not] A.`, `The X V the Y.`, `The X does not V the Y.`
//! Rules: `If C1 [and C2 ...] [,] then C.` where a condition may introduce
//! the rule variable with "someone"/"something" and later clauses refer to
//! it with "they"/"them"/"it".

use std::fmt;

use thiserror::Error;

use crate::logic::{Atom, Entity, Literal, Polarity, Rule, RuleId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

/// A parsed sentence. Rules get their ids when a problem is assembled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Fact(Literal),
    Rule { conditions: Vec<Literal>, consequent: Literal },
}

impl Statement {
    pub fn into_rule(self, id: RuleId) -> Option<Rule> {
        match self {
            Statement::Rule { conditions, consequent } => Rule::new(id, conditions, consequent).ok(),
            Statement::Fact(_) => None,
        }
    }
}

const KEYWORDS: &[&str] = &[
    "the",
    "if",
    "then",
    "and",
    "is",
    "are",
    "not",
    "does",
    "do",
    "someone",
    "something",
    "they",
    "them",
    "it",
    "a",
    "an",
];

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    lower: String,
    offset: usize,
}

fn tokenize<'a>(text: &'a str) -> Vec<Token<'a>> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    let flush = |tokens: &mut Vec<Token<'a>>, s: usize, e: usize| {
        let word = &text[s..e];
        tokens.push(Token { text: word, lower: word.to_lowercase(), offset: s });
    };
    for (i, ch) in text.char_indices() {
        if ch.is_alphanumeric() || ch == '-' || ch == '_' || ch == '\'' {
            start.get_or_insert(i);
            continue;
        }
        if let Some(s) = start.take() {
            flush(&mut tokens, s, i);
        }
        if !ch.is_whitespace() {
            tokens.push(Token { text: &text[i..i + ch.len_utf8()], lower: ch.to_string(), offset: i });
        }
    }
    if let Some(s) = start {
        flush(&mut tokens, s, text.len());
    }
    tokens
}

/// Third-person singular form of a bare verb.
pub fn third_person(bare: &str) -> String {
    let b = bare.to_lowercase();
    let sibilant = ["s", "x", "z", "ch", "sh", "o"];
    if sibilant.iter().any(|s| b.ends_with(s)) {
        format!("{b}es")
    } else if b.len() > 1 && b.ends_with('y') && !matches!(b.as_bytes()[b.len() - 2], b'a' | b'e' | b'i' | b'o' | b'u')
    {
        format!("{}ies", &b[..b.len() - 1])
    } else {
        format!("{b}s")
    }
}

/// Bare form of a third-person singular verb; inverse of [`third_person`].
pub fn bare_form(third: &str) -> String {
    let t = third.to_lowercase();
    if let Some(stem) = t.strip_suffix("ies") {
        if !stem.is_empty() {
            return format!("{stem}y");
        }
    }
    for suffix in ["sses", "xes", "zes", "ches", "shes", "oes"] {
        if t.ends_with(suffix) {
            return t[..t.len() - 2].to_string();
        }
    }
    t.strip_suffix('s').unwrap_or(&t).to_string()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Fact,
    Condition,
    Consequent,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Number {
    Singular,
    Plural,
}

struct Cursor<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    end_offset: usize,
    var_introduced: bool,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn peek_is(&self, word: &str) -> bool {
        self.peek().is_some_and(|t| t.lower == word)
    }

    fn error(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError { offset: t.offset, expected: expected.to_string(), found: format!("{:?}", t.text) },
            None => ParseError {
                offset: self.end_offset,
                expected: expected.to_string(),
                found: "end of sentence".to_string(),
            },
        }
    }

    fn expect(&mut self, word: &str) -> Result<(), ParseError> {
        if self.peek_is(word) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("{word:?}")))
        }
    }

    fn content_word(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(t)
                if t.text.chars().next().is_some_and(char::is_alphabetic) && !KEYWORDS.contains(&t.lower.as_str()) =>
            {
                let w = t.lower.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error(what)),
        }
    }

    fn is_proper_name(t: &Token<'_>) -> bool {
        t.text.chars().next().is_some_and(char::is_uppercase) && !KEYWORDS.contains(&t.lower.as_str())
    }

    fn introduce_var(&mut self, mode: Mode) -> Result<Entity, ParseError> {
        match mode {
            Mode::Fact => Err(self.error("a named entity (facts cannot mention someone)")),
            Mode::Consequent => Err(self.error("a named entity or \"they\" (consequents cannot introduce someone)")),
            Mode::Condition if self.var_introduced => {
                Err(self.error("\"they\"/\"them\" (a rule binds only one someone)"))
            }
            Mode::Condition => {
                self.var_introduced = true;
                self.pos += 1;
                Ok(Entity::Var)
            }
        }
    }

    fn refer_var(&mut self) -> Result<Entity, ParseError> {
        if !self.var_introduced {
            return Err(self.error("a named entity (no someone for this pronoun to refer to)"));
        }
        self.pos += 1;
        Ok(Entity::Var)
    }

    fn subject(&mut self, mode: Mode) -> Result<(Entity, Number), ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("a subject"));
        };
        match tok.lower.as_str() {
            "the" => {
                self.pos += 1;
                let name = self.content_word("an entity name after \"the\"")?;
                Ok((Entity::Const(name), Number::Singular))
            }
            "someone" | "something" => Ok((self.introduce_var(mode)?, Number::Singular)),
            "they" => Ok((self.refer_var()?, Number::Plural)),
            "it" => Ok((self.refer_var()?, Number::Singular)),
            _ if Self::is_proper_name(&tok) => {
                self.pos += 1;
                Ok((Entity::Const(tok.lower.clone()), Number::Singular))
            }
            _ => Err(self.error("a subject (\"the X\", a name, \"someone\", or \"they\")")),
        }
    }

    fn object(&mut self, mode: Mode) -> Result<Entity, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("an object"));
        };
        match tok.lower.as_str() {
            "the" => {
                self.pos += 1;
                Ok(Entity::Const(self.content_word("an entity name after \"the\"")?))
            }
            "someone" | "something" => self.introduce_var(mode),
            "them" | "it" => self.refer_var(),
            _ if Self::is_proper_name(&tok) => {
                self.pos += 1;
                Ok(Entity::Const(tok.lower.clone()))
            }
            _ => Err(self.error("an object (\"the X\", a name, \"someone\", or \"them\")")),
        }
    }

    fn clause(&mut self, mode: Mode) -> Result<Literal, ParseError> {
        let (subject, number) = self.subject(mode)?;
        let copula = match number {
            Number::Singular => "is",
            Number::Plural => "are",
        };
        let auxiliary = match number {
            Number::Singular => "does",
            Number::Plural => "do",
        };
        if self.peek_is(copula) {
            self.pos += 1;
            let polarity = if self.peek_is("not") {
                self.pos += 1;
                Polarity::Negative
            } else {
                Polarity::Positive
            };
            let adjective = self.content_word("an adjective")?;
            return Ok(Literal { atom: Atom::Attr { subject, adjective }, polarity });
        }
        if self.peek_is(auxiliary) {
            self.pos += 1;
            self.expect("not")?;
            let bare = self.content_word("a verb after \"not\"")?;
            let object = self.object(mode)?;
            return Ok(Literal {
                atom: Atom::Rel { verb: third_person(&bare), subject, object },
                polarity: Polarity::Negative,
            });
        }
        let verb_offset = self.peek().map(|t| t.offset);
        let word = self.content_word(&format!("\"{copula}\", \"{auxiliary} not\", or a verb"))?;
        let verb = match number {
            Number::Plural => third_person(&word),
            Number::Singular if word.ends_with('s') => word,
            Number::Singular => {
                return Err(ParseError {
                    offset: verb_offset.unwrap_or(self.end_offset),
                    expected: "a third-person verb (e.g. \"chases\")".into(),
                    found: format!("{word:?}"),
                })
            }
        };
        let object = self.object(mode)?;
        Ok(Literal { atom: Atom::Rel { verb, subject, object }, polarity: Polarity::Positive })
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.peek_is(".") {
            self.pos += 1;
        }
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error("end of sentence")),
        }
    }
}

/// Parses one sentence into a fact or a rule.
pub fn parse_statement(text: &str) -> Result<Statement, ParseError> {
    let mut cur = Cursor { tokens: tokenize(text), pos: 0, end_offset: text.len(), var_introduced: false };
    if cur.peek().is_none() {
        return Err(cur.error("a statement"));
    }
    if !cur.peek_is("if") {
        let literal = cur.clause(Mode::Fact)?;
        cur.finish()?;
        return Ok(Statement::Fact(literal));
    }
    cur.pos += 1;
    let mut conditions = vec![cur.clause(Mode::Condition)?];
    loop {
        if cur.peek_is("and") {
            cur.pos += 1;
            conditions.push(cur.clause(Mode::Condition)?);
            continue;
        }
        if cur.peek_is(",") {
            cur.pos += 1;
        }
        if cur.peek_is("then") {
            cur.pos += 1;
            break;
        }
        return Err(cur.error("\"and\" or \"then\""));
    }
    let consequent = cur.clause(Mode::Consequent)?;
    cur.finish()?;
    Ok(Statement::Rule { conditions, consequent })
}

/// Parses one clause (no terminal period required) as a ground literal or
/// as a rule-variable template when `allow_someone` is set.
pub fn parse_clause(text: &str, allow_someone: bool) -> Result<Literal, ParseError> {
    let mut cur = Cursor { tokens: tokenize(text), pos: 0, end_offset: text.len(), var_introduced: false };
    let mode = if allow_someone { Mode::Condition } else { Mode::Fact };
    // A bare pronoun refers to the clause's own variable in this context.
    if allow_someone && cur.peek().is_some_and(|t| t.lower == "they" || t.lower == "it") {
        cur.var_introduced = true;
    }
    let lit = cur.clause(mode)?;
    cur.finish()?;
    Ok(lit)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Subject,
    Object,
}

struct Renderer {
    var_seen: bool,
}

impl Renderer {
    fn entity(&mut self, e: &Entity, slot: Slot) -> (String, Number) {
        match e {
            Entity::Const(name) => (format!("the {name}"), Number::Singular),
            Entity::Var if !self.var_seen => {
                self.var_seen = true;
                ("someone".to_string(), Number::Singular)
            }
            Entity::Var => match slot {
                Slot::Subject => ("they".to_string(), Number::Plural),
                Slot::Object => ("them".to_string(), Number::Singular),
            },
        }
    }

    fn clause(&mut self, l: &Literal) -> String {
        let negative = l.polarity == Polarity::Negative;
        match &l.atom {
            Atom::Attr { subject, adjective } => {
                let (s, n) = self.entity(subject, Slot::Subject);
                let copula = if n == Number::Plural { "are" } else { "is" };
                let not = if negative { " not" } else { "" };
                format!("{s} {copula}{not} {adjective}")
            }
            Atom::Rel { verb, subject, object } => {
                let (s, n) = self.entity(subject, Slot::Subject);
                let (o, _) = self.entity(object, Slot::Object);
                match (negative, n) {
                    (true, Number::Singular) => format!("{s} does not {} {o}", bare_form(verb)),
                    (true, Number::Plural) => format!("{s} do not {} {o}", bare_form(verb)),
                    (false, Number::Singular) => format!("{s} {verb} {o}"),
                    (false, Number::Plural) => format!("{s} {} {o}", bare_form(verb)),
                }
            }
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Canonical English sentence for a literal, e.g. `The cow is not blue.`
pub fn render_literal(l: &Literal) -> String {
    format!("{}.", capitalize(&Renderer { var_seen: false }.clause(l)))
}

/// Lowercase clause without terminal period, for embedding in prose.
pub fn render_clause(l: &Literal) -> String {
    Renderer { var_seen: false }.clause(l)
}

fn render_conditional(conditions: &[Literal], consequent: &Literal) -> String {
    let mut r = Renderer { var_seen: false };
    let conds: Vec<String> = conditions.iter().map(|c| r.clause(c)).collect();
    let cons = r.clause(consequent);
    format!("If {} then {}.", conds.join(" and "), cons)
}

/// Canonical sentence for a rule; parses back to the same conditions and
/// consequent.
pub fn render_rule(rule: &Rule) -> String {
    render_conditional(&rule.conditions, &rule.consequent)
}

/// Clauses joined by "and", sharing one variable mention.
pub(crate) fn render_conjunction(clauses: &[Literal]) -> String {
    let mut r = Renderer { var_seen: false };
    clauses.iter().map(|c| r.clause(c)).collect::<Vec<_>>().join(" and ")
}

pub(crate) fn render_if_then(conditions: &[Literal], consequent: &Literal) -> String {
    render_conditional(conditions, consequent)
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Fact(l) => f.write_str(&render_literal(l)),
            Statement::Rule { conditions, consequent } => f.write_str(&render_conditional(conditions, consequent)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::tests::{attr, c, rel};

    fn fact(text: &str) -> Literal {
        match parse_statement(text).unwrap() {
            Statement::Fact(l) => l,
            other => panic!("expected fact, got {other:?}"),
        }
    }

    fn rule(text: &str) -> (Vec<Literal>, Literal) {
        match parse_statement(text).unwrap() {
            Statement::Rule { conditions, consequent } => (conditions, consequent),
            other => panic!("expected rule, got {other:?}"),
        }
    }

    #[test]
    fn attribute_fact() {
        assert_eq!(fact("The cow is blue."), attr(c("cow"), "blue", true));
        assert_eq!(fact("the mouse is not round"), attr(c("mouse"), "round", false));
    }

    #[test]
    fn relation_facts() {
        assert_eq!(fact("The tiger sees the bear."), rel("sees", c("tiger"), c("bear"), true));
        assert_eq!(fact("The cow does not visit the dog."), rel("visits", c("cow"), c("dog"), false));
        assert_eq!(fact("Bob likes the cat."), rel("likes", c("bob"), c("cat"), true));
    }

    #[test]
    fn rule_with_ground_consequent() {
        let (conds, cons) = rule("If someone visits the tiger then the tiger is blue.");
        assert_eq!(conds, vec![rel("visits", Entity::Var, c("tiger"), true)]);
        assert_eq!(cons, attr(c("tiger"), "blue", true));
    }

    #[test]
    fn rule_with_anaphora() {
        let (conds, cons) = rule("If someone is blue and they chase the lion then they are rough.");
        assert_eq!(conds, vec![attr(Entity::Var, "blue", true), rel("chases", Entity::Var, c("lion"), true)]);
        assert_eq!(cons, attr(Entity::Var, "rough", true));
    }

    #[test]
    fn rule_with_negated_plural_condition_and_comma() {
        let (conds, cons) = rule("if someone is cold and they do not visit the mouse, then the mouse sees the dog");
        assert_eq!(conds[1], rel("visits", Entity::Var, c("mouse"), false));
        assert_eq!(cons, rel("sees", c("mouse"), c("dog"), true));
    }

    #[test]
    fn object_variable() {
        let (conds, cons) = rule("If the cow likes someone then they chase them.");
        assert_eq!(conds, vec![rel("likes", c("cow"), Entity::Var, true)]);
        assert_eq!(cons, rel("chases", Entity::Var, Entity::Var, true));
    }

    #[test]
    fn rejects_out_of_grammar() {
        assert!(parse_statement("All cows are blue.").is_err());
        assert!(parse_statement("If they are big then they are red.").is_err());
        assert!(parse_statement("Someone is blue.").is_err());
        assert!(parse_statement("If the cow is big then someone is red.").is_err());
        assert!(parse_statement("If someone is big and someone is red then the cow is red.").is_err());
        assert!(parse_statement("The cow chase the lion.").is_err());
        assert!(parse_statement("").is_err());
        let err = parse_statement("The cow is blue and green.").unwrap_err();
        assert_eq!(err.offset, 16);
    }

    #[test]
    fn error_reports_offset_and_hint() {
        let err = parse_statement("If the cow is blue or the tiger is red then the cow is big.").unwrap_err();
        assert_eq!(err.offset, 19);
        assert!(err.expected.contains("then"));
    }

    #[test]
    fn inflection_round_trips() {
        for bare in ["chase", "see", "eat", "like", "visit", "need", "kiss", "fly", "go", "play", "watch"] {
            assert_eq!(bare_form(&third_person(bare)), bare, "{bare}");
        }
    }

    #[test]
    fn render_examples() {
        assert_eq!(render_literal(&attr(c("tiger"), "blue", true)), "The tiger is blue.");
        assert_eq!(render_literal(&rel("eats", c("tiger"), c("squirrel"), true)), "The tiger eats the squirrel.");
        assert_eq!(render_literal(&attr(c("mouse"), "round", false)), "The mouse is not round.");
        assert_eq!(render_literal(&rel("chases", c("cow"), c("lion"), false)), "The cow does not chase the lion.");
    }

    #[test]
    fn rule_render_round_trip() {
        for text in [
            "If someone is blue and they chase the lion then they are rough.",
            "If the cow is blue and the tiger sees the bear then the cow chases the lion.",
            "If someone is cold and they do not visit the mouse then the mouse sees the dog.",
            "If the cow likes someone then they do not chase them.",
        ] {
            let st = parse_statement(text).unwrap();
            assert_eq!(st.to_string(), text);
        }
    }
}
