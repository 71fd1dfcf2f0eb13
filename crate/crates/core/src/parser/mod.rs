//! Problem files and the statement grammar.
//!
//! Two on-disk formats are accepted:
//!
//! * the line-prefixed text format (`.pw`): `fact:`, `rule:`, `hypothesis:`,
//!   `option:`, `label:` and `id:` lines, `#` comments;
//! * the structured format: one JSON record per line with `facts`, `rules`,
//!   `hypothesis` or `options`, and optional `label`, `id`, `depth`.

mod statement;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{KnowledgeBase, Literal, Rule, RuleId};

pub(crate) use statement::render_conjunction;
pub use statement::{
    bare_form, parse_clause, parse_statement, render_clause, render_literal, render_rule, third_person, ParseError,
    Statement,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Proved,
    Disproved,
    Unknown,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Proved, Label::Disproved, Label::Unknown];

    pub fn index(self) -> usize {
        match self {
            Label::Proved => 0,
            Label::Disproved => 1,
            Label::Unknown => 2,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Label::Proved => "Proved",
            Label::Disproved => "Disproved",
            Label::Unknown => "Unknown",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "proved" | "true" => Ok(Label::Proved),
            "disproved" | "false" => Ok(Label::Disproved),
            "unknown" => Ok(Label::Unknown),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// "If P, then Q": an optional ground condition and a ground consequent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub condition: Vec<Literal>,
    pub consequent: Literal,
}

impl Hypothesis {
    pub fn new(consequent: Literal) -> Self {
        Hypothesis { condition: Vec::new(), consequent }
    }

    pub fn render(&self) -> String {
        if self.condition.is_empty() {
            render_literal(&self.consequent)
        } else {
            statement::render_if_then(&self.condition, &self.consequent)
        }
    }
}

/// Single hypothesis or a list of options evaluated in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Single(Hypothesis),
    Options(Vec<Hypothesis>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProblemMeta {
    pub id: String,
    pub source: String,
    /// Minimal proof depth, when known (generated corpora record it).
    pub depth: Option<u32>,
    /// Premise sentences outside the grammar, kept verbatim. A problem
    /// with any of these can only be attempted by the remote backend.
    pub free_text: Vec<String>,
    /// 1-based index of the correct option, for multi-option problems.
    pub answer: Option<usize>,
}

impl ProblemMeta {
    pub fn remote_only(&self) -> bool {
        !self.free_text.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub kb: KnowledgeBase,
    pub query: Query,
    pub gold_label: Option<Label>,
    pub meta: ProblemMeta,
}

impl Problem {
    pub fn hypothesis(&self) -> Option<&Hypothesis> {
        match &self.query {
            Query::Single(h) => Some(h),
            Query::Options(_) => None,
        }
    }

    /// Structured record for this problem; statements are rendered
    /// canonically.
    pub fn to_record(&self) -> ProblemRecord {
        let (hypothesis, options) = match &self.query {
            Query::Single(h) => (Some(h.render()), None),
            Query::Options(os) => (None, Some(os.iter().map(Hypothesis::render).collect())),
        };
        let mut facts: Vec<String> =
            self.kb.facts().iter().filter(|f| f.is_given()).map(|f| render_literal(&f.literal)).collect();
        facts.extend(self.meta.free_text.iter().cloned());
        ProblemRecord {
            id: (!self.meta.id.is_empty()).then(|| self.meta.id.clone()),
            facts,
            rules: self.kb.rules().iter().map(render_rule).collect(),
            hypothesis,
            options,
            label: self.gold_label,
            depth: self.meta.depth,
            answer: self.meta.answer,
        }
    }
}

/// One line of the structured corpus format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default)]
    pub facts: Vec<String>,
    #[serde(default)]
    pub rules: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub error: ParseError,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.error)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("{} statement(s) failed to parse: {}", .0.len(), join_errors(.0))]
    Statements(Vec<LineError>),
    #[error("problem has no facts and no rules")]
    EmptyKnowledgeBase,
    #[error("problem has no hypothesis or options")]
    MissingHypothesis,
    #[error("problem has both a hypothesis and options")]
    HypothesisAndOptions,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("malformed record: {0}")]
    Record(String),
    #[error("io error: {0}")]
    Io(String),
}

fn join_errors(errors: &[LineError]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Keep out-of-grammar premises as free text instead of failing.
    pub allow_free_text: bool,
}

fn parse_hypothesis(text: &str) -> Result<Hypothesis, ParseError> {
    match parse_statement(text)? {
        Statement::Fact(l) => Ok(Hypothesis::new(l)),
        Statement::Rule { conditions, consequent } => {
            if conditions.iter().any(Literal::has_var) || consequent.has_var() {
                return Err(ParseError {
                    offset: 0,
                    expected: "a hypothesis about named entities only".into(),
                    found: "someone".into(),
                });
            }
            Ok(Hypothesis { condition: conditions, consequent })
        }
    }
}

struct Builder {
    facts: Vec<Literal>,
    rules: Vec<Rule>,
    free_text: Vec<String>,
    errors: Vec<LineError>,
    options: ParseOptions,
}

impl Builder {
    fn new(options: ParseOptions) -> Self {
        Builder { facts: Vec::new(), rules: Vec::new(), free_text: Vec::new(), errors: Vec::new(), options }
    }

    fn premise(&mut self, line: usize, text: &str) {
        match parse_statement(text) {
            Ok(Statement::Fact(l)) => self.facts.push(l),
            Ok(st) => {
                let id = RuleId(self.rules.len() as u32 + 1);
                match st.into_rule(id) {
                    Some(rule) => self.rules.push(rule),
                    None => self.errors.push(LineError {
                        line,
                        error: ParseError {
                            offset: 0,
                            expected: "a rule whose consequent variable is bound by a condition".into(),
                            found: text.to_string(),
                        },
                    }),
                }
            }
            Err(_) if self.options.allow_free_text => self.free_text.push(text.trim().to_string()),
            Err(error) => self.errors.push(LineError { line, error }),
        }
    }

    fn hypothesis(&mut self, line: usize, text: &str) -> Option<Hypothesis> {
        match parse_hypothesis(text) {
            Ok(h) => Some(h),
            Err(error) => {
                self.errors.push(LineError { line, error });
                None
            }
        }
    }

    fn finish(
        self,
        hypothesis: Option<Hypothesis>,
        options: Vec<Hypothesis>,
        gold_label: Option<Label>,
        meta: ProblemMeta,
    ) -> Result<Problem, ProblemError> {
        if !self.errors.is_empty() {
            return Err(ProblemError::Statements(self.errors));
        }
        if self.facts.is_empty() && self.rules.is_empty() && self.free_text.is_empty() {
            return Err(ProblemError::EmptyKnowledgeBase);
        }
        let query = match (hypothesis, options.is_empty()) {
            (Some(_), false) => return Err(ProblemError::HypothesisAndOptions),
            (Some(h), true) => Query::Single(h),
            (None, false) => Query::Options(options),
            (None, true) => return Err(ProblemError::MissingHypothesis),
        };
        let kb = KnowledgeBase::from_parts(self.facts, self.rules).map_err(|e| ProblemError::Record(e.to_string()))?;
        Ok(Problem { kb, query, gold_label, meta: ProblemMeta { free_text: self.free_text, ..meta } })
    }
}

/// Parses the line-prefixed text format.
pub fn parse_problem_text(doc: &str, options: ParseOptions) -> Result<Problem, ProblemError> {
    let mut b = Builder::new(options);
    let mut hypothesis = None;
    let mut hyp_options = Vec::new();
    let mut label = None;
    let mut meta = ProblemMeta::default();
    for (i, raw) in doc.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let Some((key, value)) = text.split_once(':') else {
            return Err(ProblemError::Syntax { line, message: format!("expected `key: value`, found {text:?}") });
        };
        let value = value.trim();
        match key.trim().to_lowercase().as_str() {
            "fact" | "rule" | "premise" => b.premise(line, value),
            "hypothesis" => {
                if hypothesis.is_some() {
                    return Err(ProblemError::Syntax { line, message: "duplicate hypothesis".into() });
                }
                hypothesis = Some(b.hypothesis(line, value));
            }
            "option" => {
                if let Some(h) = b.hypothesis(line, value) {
                    hyp_options.push(h);
                }
            }
            "label" => label = Some(value.parse::<Label>().map_err(|message| ProblemError::Syntax { line, message })?),
            "id" => meta.id = value.to_string(),
            "answer" => {
                meta.answer = Some(
                    value
                        .parse()
                        .map_err(|_| ProblemError::Syntax { line, message: format!("bad answer index {value:?}") })?,
                )
            }
            "depth" => {
                meta.depth = Some(
                    value
                        .parse()
                        .map_err(|_| ProblemError::Syntax { line, message: format!("bad depth {value:?}") })?,
                )
            }
            other => return Err(ProblemError::Syntax { line, message: format!("unknown key {other:?}") }),
        }
    }
    let hypothesis = match hypothesis {
        Some(Some(h)) => Some(h),
        // Parse error already recorded.
        Some(None) => None,
        None => None,
    };
    if hypothesis.is_none() && hyp_options.is_empty() && !b.errors.is_empty() {
        return Err(ProblemError::Statements(b.errors));
    }
    b.finish(hypothesis, hyp_options, label, meta)
}

/// Builds a problem from a structured record. `line` is used for error
/// reporting (statements are numbered in record order: facts, rules,
/// hypothesis, options).
pub fn parse_problem_record(record: &ProblemRecord, options: ParseOptions) -> Result<Problem, ProblemError> {
    let mut b = Builder::new(options);
    let mut n = 0;
    for text in record.facts.iter().chain(&record.rules) {
        n += 1;
        b.premise(n, text);
    }
    let hypothesis = record.hypothesis.as_deref().and_then(|h| {
        n += 1;
        b.hypothesis(n, h)
    });
    let mut hyp_options = Vec::new();
    for o in record.options.iter().flatten() {
        n += 1;
        if let Some(h) = b.hypothesis(n, o) {
            hyp_options.push(h);
        }
    }
    let meta = ProblemMeta {
        id: record.id.clone().unwrap_or_default(),
        depth: record.depth,
        answer: record.answer,
        ..Default::default()
    };
    if record.hypothesis.is_some() && record.options.is_some() {
        return Err(ProblemError::HypothesisAndOptions);
    }
    b.finish(hypothesis, hyp_options, record.label, meta)
}

/// Parses either format, detected from the first non-blank character.
pub fn parse_problem(doc: &str, options: ParseOptions) -> Result<Problem, ProblemError> {
    if doc.trim_start().starts_with('{') {
        let record: ProblemRecord =
            serde_json::from_str(doc.trim()).map_err(|e| ProblemError::Record(e.to_string()))?;
        parse_problem_record(&record, options)
    } else {
        parse_problem_text(doc, options)
    }
}

/// Parses a corpus: a structured file yields one problem per non-blank
/// line; a text-format file yields a single problem.
pub fn parse_corpus(doc: &str, options: ParseOptions) -> Vec<Result<Problem, ProblemError>> {
    if !doc.trim_start().starts_with('{') {
        return vec![parse_problem_text(doc, options)];
    }
    doc.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let record: ProblemRecord =
                serde_json::from_str(l).map_err(|e| ProblemError::Syntax { line: i + 1, message: e.to_string() })?;
            let mut p = parse_problem_record(&record, options)?;
            if p.meta.id.is_empty() {
                p.meta.id = format!("line-{}", i + 1);
            }
            Ok(p)
        })
        .collect()
}

pub fn load_problem(path: &Path, options: ParseOptions) -> Result<Problem, ProblemError> {
    let doc = std::fs::read_to_string(path).map_err(|e| ProblemError::Io(e.to_string()))?;
    let mut p = parse_problem(&doc, options)?;
    p.meta.source = path.display().to_string();
    if p.meta.id.is_empty() {
        p.meta.id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok(p)
}

pub fn load_corpus(path: &Path, options: ParseOptions) -> Result<Vec<Result<Problem, ProblemError>>, ProblemError> {
    let doc = std::fs::read_to_string(path).map_err(|e| ProblemError::Io(e.to_string()))?;
    let mut out = parse_corpus(&doc, options);
    for p in out.iter_mut().flatten() {
        p.meta.source = path.display().to_string();
        if p.meta.id.is_empty() {
            p.meta.id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_format_basic() {
        let doc = "# demo\nfact: The cow is blue.\nrule: If someone is blue then they chase the tiger.\nhypothesis: The cow chases the tiger.\nlabel: Proved\n";
        let p = parse_problem(doc, ParseOptions::default()).unwrap();
        assert_eq!(p.kb.len(), 1);
        assert_eq!(p.kb.rules().len(), 1);
        assert_eq!(p.gold_label, Some(Label::Proved));
        assert!(p.hypothesis().is_some());
    }

    #[test]
    fn hypothesis_only_is_rejected() {
        let err = parse_problem("hypothesis: The cow is blue.", ParseOptions::default()).unwrap_err();
        assert_eq!(err, ProblemError::EmptyKnowledgeBase);
    }

    #[test]
    fn errors_are_aggregated_with_lines() {
        let doc =
            "fact: The cow is blue.\nfact: All cows are blue.\nrule: If the cow is then.\nhypothesis: The cow is blue.";
        match parse_problem(doc, ParseOptions::default()).unwrap_err() {
            ProblemError::Statements(errs) => {
                assert_eq!(errs.iter().map(|e| e.line).collect::<Vec<_>>(), vec![2, 3]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn free_text_is_kept_when_allowed() {
        let doc = "fact: The cow is blue.\nfact: All cows are blue.\nhypothesis: The cow is blue.";
        let p = parse_problem(doc, ParseOptions { allow_free_text: true }).unwrap();
        assert!(p.meta.remote_only());
        assert_eq!(p.meta.free_text, vec!["All cows are blue.".to_string()]);
    }

    #[test]
    fn structured_options_record() {
        let line = r#"{"id":"q1","facts":["The cow is blue."],"rules":[],"options":["The cow is blue.","The cow is red.","The cow is big.","The cow is cold.","The cow is nice."]}"#;
        let p = parse_problem(line, ParseOptions::default()).unwrap();
        match &p.query {
            Query::Options(os) => assert_eq!(os.len(), 5),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(p.meta.id, "q1");
    }

    #[test]
    fn record_with_both_modes_is_rejected() {
        let line = r#"{"facts":["The cow is blue."],"hypothesis":"The cow is blue.","options":["The cow is red."]}"#;
        assert_eq!(parse_problem(line, ParseOptions::default()).unwrap_err(), ProblemError::HypothesisAndOptions);
    }

    #[test]
    fn conditional_hypothesis() {
        let doc = "fact: The cow is blue.\nhypothesis: If the cow is cold then the cow is blue.";
        let p = parse_problem(doc, ParseOptions::default()).unwrap();
        let h = p.hypothesis().unwrap();
        assert_eq!(h.condition.len(), 1);
        assert_eq!(h.render(), "If the cow is cold then the cow is blue.");
    }

    #[test]
    fn record_round_trip() {
        let doc = "fact: The cow is blue.\nrule: If someone is blue then they chase the tiger.\nhypothesis: The cow chases the tiger.\nlabel: Unknown";
        let p = parse_problem(doc, ParseOptions::default()).unwrap();
        let json = serde_json::to_string(&p.to_record()).unwrap();
        let q = parse_problem(&json, ParseOptions::default()).unwrap();
        assert_eq!(q.to_record(), p.to_record());
    }
}
