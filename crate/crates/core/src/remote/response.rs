use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::logic::Literal;
use crate::modules::ModuleKind;
use crate::parser::{parse_clause, parse_statement, render_clause, render_conjunction, Label, Statement};

use super::prompt::answer_header;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unreadable {kind} response near {span:?}: {reason}")]
pub struct ResponseParseError {
    pub kind: ModuleKind,
    pub span: String,
    pub reason: String,
}

fn failed(kind: ModuleKind, span: &str, reason: &str) -> ResponseParseError {
    let mut span: String = span.chars().take(80).collect();
    if span.is_empty() {
        span = "<empty>".to_string();
    }
    ResponseParseError { kind, span, reason: reason.to_string() }
}

/// A parsed value and whether the lenient fallback was needed for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed<T> {
    pub value: T,
    pub fallback: bool,
}

fn strict<T>(value: T) -> Parsed<T> {
    Parsed { value, fallback: false }
}

fn lenient<T>(value: T) -> Parsed<T> {
    Parsed { value, fallback: true }
}

/// One inference line: cited premise numbers and the conclusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceLine {
    pub cited: Vec<usize>,
    pub conclusion: Literal,
}

/// One explanation line: the rule's premise number, the goal it explains
/// and the conditions that would establish it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReasonLine {
    pub rule: usize,
    pub target: Literal,
    pub goals: Vec<Literal>,
}

/// Backward rule selection: rule numbers per 1-based goal index, plus
/// numbers the fallback could not attach to a goal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoalRulesAnswer {
    pub per_goal: Vec<(usize, Vec<usize>)>,
    pub unassigned: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModulePayload {
    Premises(Vec<usize>),
    GoalRules(GoalRulesAnswer),
    Inferences { lines: Vec<InferenceLine>, opaque: Vec<String> },
    Reasons { lines: Vec<ReasonLine>, opaque: Vec<String> },
    Label { label: Label, cited: Vec<usize> },
    Confusion(bool),
}

static PREMISE_REF: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bpremises?\s+(\d+)").unwrap());
static LIST_LINE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)^(?:premise\s+)?(\d+)\s*[:,.]").unwrap());
static NONE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)^none\.?$").unwrap());
static GOAL_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^goal\s+(\d+)\s*:\s*(none|premise\s+\d+(?:\s*,\s*premise\s+\d+)*)\.?$").unwrap());
static INFERENCE_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^(?:step\s+\d+:\s*)?from\s+(premise\s+\d+(?:(?:\s*,\s*|\s*,?\s+and\s+)premise\s+\d+)*)\s*,\s*(.+?)\.?$",
    )
    .unwrap()
});
static THEREFORE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:therefore|thus|so|hence),?\s+(.+?)(?:\s*\(.*?\))?\s*\.?$").unwrap());
static REASON_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^according to premise\s+(\d+)\s*,\s*if we want to prove\s+(.+?)\s*,\s*we need to prove\s+(.+?)\.?(?:\s+or)?$",
    )
    .unwrap()
});
static LABEL_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^(?:the hypothesis (?:can be directly |is )?)?(proved|disproved|unknown)(?: by (.+?))?\.?$")
        .unwrap()
});
static LABEL_WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(disproved|proved|unknown)\b").unwrap());
static BOOL_WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(true|false)\b").unwrap());

/// The text after the last answer header, or all of it when the model did
/// not repeat the header.
pub fn answer_body(kind: ModuleKind, text: &str) -> &str {
    let header = answer_header(kind);
    match text.rfind(header) {
        Some(i) => text[i + header.len()..].trim(),
        None => text.trim(),
    }
}

fn lines(body: &str) -> impl Iterator<Item = &str> {
    body.lines().map(str::trim).filter(|l| !l.is_empty())
}

fn premise_numbers(text: &str) -> Vec<usize> {
    PREMISE_REF.captures_iter(text).filter_map(|c| c[1].parse().ok()).collect()
}

fn strip_or(line: &str) -> &str {
    line.strip_suffix(" or").unwrap_or(line).trim_end()
}

/// Parses a module response according to the module's answer grammar:
/// strictly first, then with a keyword scan.
pub fn parse_module_response(kind: ModuleKind, text: &str) -> Result<Parsed<ModulePayload>, ResponseParseError> {
    let body = answer_body(kind, text);
    match kind {
        ModuleKind::FactIdentify | ModuleKind::RuleSelectForward => {
            parse_premise_list(kind, body).map(|p| map(p, ModulePayload::Premises))
        }
        ModuleKind::RuleSelectBackward => parse_goal_rules(body).map(|p| map(p, ModulePayload::GoalRules)),
        ModuleKind::LogicDeduce => parse_inferences(body),
        ModuleKind::LogicAbduce => parse_reasons(body),
        ModuleKind::FactCheck => parse_label(body),
        ModuleKind::ConfusionCheck => parse_confusion(body).map(|p| map(p, ModulePayload::Confusion)),
    }
}

fn map<T, U>(p: Parsed<T>, f: impl FnOnce(T) -> U) -> Parsed<U> {
    Parsed { value: f(p.value), fallback: p.fallback }
}

fn parse_premise_list(kind: ModuleKind, body: &str) -> Result<Parsed<Vec<usize>>, ResponseParseError> {
    if NONE.is_match(body) {
        return Ok(strict(Vec::new()));
    }
    let strict_numbers: Option<Vec<usize>> =
        lines(body).map(|l| LIST_LINE.captures(l).and_then(|c| c[1].parse().ok())).collect();
    match strict_numbers {
        Some(ns) if !ns.is_empty() => Ok(strict(ns)),
        _ => {
            let ns = premise_numbers(body);
            if !ns.is_empty() {
                Ok(lenient(ns))
            } else if body.to_lowercase().contains("none") {
                Ok(lenient(Vec::new()))
            } else {
                Err(failed(kind, body, "no premise numbers"))
            }
        }
    }
}

fn parse_goal_rules(body: &str) -> Result<Parsed<GoalRulesAnswer>, ResponseParseError> {
    let per_goal: Option<Vec<(usize, Vec<usize>)>> = lines(body)
        .map(|l| {
            let c = GOAL_LINE.captures(l)?;
            Some((c[1].parse().ok()?, premise_numbers(&c[2])))
        })
        .collect();
    match per_goal {
        Some(per_goal) if !per_goal.is_empty() => Ok(strict(GoalRulesAnswer { per_goal, unassigned: Vec::new() })),
        _ => {
            let unassigned = premise_numbers(body);
            if unassigned.is_empty() && !body.to_lowercase().contains("none") {
                return Err(failed(ModuleKind::RuleSelectBackward, body, "no rule numbers"));
            }
            Ok(lenient(GoalRulesAnswer { per_goal: Vec::new(), unassigned }))
        }
    }
}

fn parse_inferences(body: &str) -> Result<Parsed<ModulePayload>, ResponseParseError> {
    let kind = ModuleKind::LogicDeduce;
    if NONE.is_match(body) {
        return Ok(strict(ModulePayload::Inferences { lines: Vec::new(), opaque: Vec::new() }));
    }
    let mut out = Vec::new();
    let mut opaque = Vec::new();
    let mut fallback = false;
    for line in lines(body) {
        let line = strip_or(line);
        if let Some(c) = INFERENCE_LINE.captures(line) {
            if let Ok(conclusion) = parse_clause(&c[2], false) {
                out.push(InferenceLine { cited: premise_numbers(&c[1]), conclusion });
                continue;
            }
        }
        fallback = true;
        let parsed = THEREFORE.captures(line).and_then(|c| parse_clause(c[1].trim_end_matches('.'), false).ok());
        match parsed {
            Some(conclusion) => out.push(InferenceLine { cited: premise_numbers(line), conclusion }),
            None => opaque.push(line.to_string()),
        }
    }
    if out.is_empty() {
        return Err(failed(kind, body, "no readable inference"));
    }
    Ok(Parsed { value: ModulePayload::Inferences { lines: out, opaque }, fallback })
}

fn parse_reasons(body: &str) -> Result<Parsed<ModulePayload>, ResponseParseError> {
    let kind = ModuleKind::LogicAbduce;
    let mut out = Vec::new();
    let mut opaque = Vec::new();
    for line in lines(body) {
        let line = strip_or(line);
        let reason = REASON_LINE.captures(line).and_then(|c| {
            let rule = c[1].parse().ok()?;
            let goals = c[3].replace(", and ", " and ");
            match parse_statement(&format!("If {goals} then {}.", &c[2])).ok()? {
                Statement::Rule { conditions, consequent } if consequent.is_ground() => {
                    Some(ReasonLine { rule, target: consequent, goals: conditions })
                }
                _ => None,
            }
        });
        match reason {
            Some(r) => out.push(r),
            None => opaque.push(line.to_string()),
        }
    }
    if out.is_empty() {
        return Err(failed(kind, body, "no readable explanation"));
    }
    let fallback = !opaque.is_empty();
    Ok(Parsed { value: ModulePayload::Reasons { lines: out, opaque }, fallback })
}

fn label_of(word: &str) -> Label {
    match word.to_lowercase().as_str() {
        "proved" => Label::Proved,
        "disproved" => Label::Disproved,
        _ => Label::Unknown,
    }
}

fn parse_label(body: &str) -> Result<Parsed<ModulePayload>, ResponseParseError> {
    if let Some(c) = lines(body).next().and_then(|l| LABEL_LINE.captures(l)) {
        let label = label_of(&c[1]);
        let cited = c.get(2).map(|m| premise_numbers(m.as_str())).unwrap_or_default();
        return Ok(strict(ModulePayload::Label { label, cited }));
    }
    match LABEL_WORD.captures_iter(body).last() {
        Some(c) => Ok(lenient(ModulePayload::Label { label: label_of(&c[1]), cited: premise_numbers(body) })),
        None => Err(failed(ModuleKind::FactCheck, body, "no label keyword")),
    }
}

fn parse_confusion(body: &str) -> Result<Parsed<bool>, ResponseParseError> {
    let word = body.trim_end_matches('.').to_lowercase();
    match word.as_str() {
        "true" => return Ok(strict(true)),
        "false" => return Ok(strict(false)),
        _ => {}
    }
    match BOOL_WORD.captures_iter(body).last() {
        Some(c) => Ok(lenient(c[1].eq_ignore_ascii_case("true"))),
        None => Err(failed(ModuleKind::ConfusionCheck, body, "expected True or False")),
    }
}

fn cite_list(numbers: &[usize]) -> String {
    let refs: Vec<String> = numbers.iter().map(|n| format!("Premise {n}")).collect();
    match refs.len() {
        0 => String::new(),
        1 => refs[0].clone(),
        n => format!("{} and {}", refs[..n - 1].join(", "), refs[n - 1]),
    }
}

/// `k: sentence` lines, as fact identification answers.
pub fn render_premise_lines(items: &[(usize, String)]) -> String {
    if items.is_empty() {
        return "None.".to_string();
    }
    items.iter().map(|(n, s)| format!("{n}: {s}")).collect::<Vec<_>>().join("\n")
}

/// `Premise k, rule` lines, as forward rule selection answers.
pub fn render_rule_lines(items: &[(usize, String)]) -> String {
    if items.is_empty() {
        return "None.".to_string();
    }
    items.iter().map(|(n, s)| format!("Premise {n}, {s}")).collect::<Vec<_>>().join("\n")
}

pub fn render_goal_rules(groups: &[Vec<usize>]) -> String {
    groups
        .iter()
        .enumerate()
        .map(|(i, rules)| {
            if rules.is_empty() {
                format!("Goal {}: none", i + 1)
            } else {
                let refs: Vec<String> = rules.iter().map(|n| format!("Premise {n}")).collect();
                format!("Goal {}: {}", i + 1, refs.join(", "))
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn render_inference(cited: &[usize], conclusion: &Literal) -> String {
    format!("From {}, {}.", cite_list(cited), render_clause(conclusion))
}

pub fn render_inferences(lines: &[String]) -> String {
    if lines.is_empty() {
        return "None.".to_string();
    }
    lines.join("\n")
}

pub fn render_reason(rule: usize, target: &Literal, goals: &[Literal]) -> String {
    format!(
        "According to Premise {rule}, if we want to prove {}, we need to prove {}.",
        render_clause(target),
        render_conjunction(goals)
    )
}

pub fn render_label(label: Label, cited: &[usize]) -> String {
    let word = match label {
        Label::Proved => "proved",
        Label::Disproved => "disproved",
        Label::Unknown => return "The hypothesis is unknown.".to_string(),
    };
    if cited.is_empty() {
        format!("The hypothesis is {word}.")
    } else {
        format!("The hypothesis can be directly {word} by {}.", cite_list(cited))
    }
}

pub fn render_confusion(confused: bool) -> String {
    if confused { "True" } else { "False" }.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Entity, Polarity};

    fn payload(kind: ModuleKind, text: &str) -> Parsed<ModulePayload> {
        parse_module_response(kind, text).unwrap()
    }

    #[test]
    fn confusion_answers() {
        assert_eq!(
            payload(ModuleKind::ConfusionCheck, "Confusion Check: True"),
            strict(ModulePayload::Confusion(true))
        );
        assert_eq!(payload(ModuleKind::ConfusionCheck, "false."), strict(ModulePayload::Confusion(false)));
        assert_eq!(
            payload(ModuleKind::ConfusionCheck, "I would say this is true overall"),
            lenient(ModulePayload::Confusion(true))
        );
        let err = parse_module_response(ModuleKind::ConfusionCheck, "maybe").unwrap_err();
        assert_eq!(err.span, "maybe");
    }

    #[test]
    fn rule_selection_exemplar() {
        let text =
            "Rule Selection:\nPremise 1, A La Liga soccer team ranks higher than another if it receives more points.";
        assert_eq!(payload(ModuleKind::RuleSelectForward, text), strict(ModulePayload::Premises(vec![1])));
        let two = "Premise 1, A team ranks higher. or\nPremise 2: If two teams tie then the other ranks higher.";
        assert_eq!(
            payload(ModuleKind::RuleSelectBackward, two).value,
            ModulePayload::GoalRules(GoalRulesAnswer { per_goal: Vec::new(), unassigned: vec![1, 2] })
        );
    }

    #[test]
    fn fact_check_extracts_citation() {
        assert_eq!(
            payload(ModuleKind::FactCheck, "The hypothesis can be directly proved by Premise 6."),
            strict(ModulePayload::Label { label: Label::Proved, cited: vec![6] })
        );
        assert_eq!(
            payload(ModuleKind::FactCheck, "Considering everything, it is Disproved (see Premise 3)"),
            lenient(ModulePayload::Label { label: Label::Disproved, cited: vec![3] })
        );
        assert!(parse_module_response(ModuleKind::FactCheck, "no idea").is_err());
    }

    #[test]
    fn inference_round_trip() {
        let lit = Literal::attr(Entity::constant("tiger"), "blue", Polarity::Positive);
        let line = render_inference(&[5, 12], &lit);
        assert_eq!(line, "From Premise 5 and Premise 12, the tiger is blue.");
        assert_eq!(
            payload(ModuleKind::LogicDeduce, &line).value,
            ModulePayload::Inferences {
                lines: vec![InferenceLine { cited: vec![5, 12], conclusion: lit }],
                opaque: Vec::new()
            }
        );
    }

    #[test]
    fn reason_round_trip_with_someone() {
        let target = Literal::attr(Entity::constant("tiger"), "blue", Polarity::Positive);
        let goals = vec![
            Literal::rel("visits", Entity::Var, Entity::constant("tiger"), Polarity::Positive),
            Literal::attr(Entity::Var, "big", Polarity::Negative),
        ];
        let line = render_reason(14, &target, &goals);
        assert_eq!(
            line,
            "According to Premise 14, if we want to prove the tiger is blue, we need to prove someone visits the tiger and they are not big."
        );
        let p = payload(ModuleKind::LogicAbduce, &format!("Plausible Reasons:\n{line} or"));
        assert_eq!(
            p,
            strict(ModulePayload::Reasons { lines: vec![ReasonLine { rule: 14, target, goals }], opaque: Vec::new() })
        );
    }

    #[test]
    fn label_rendering_parses_back() {
        for (label, cited) in [(Label::Proved, vec![2, 7, 9]), (Label::Disproved, vec![4]), (Label::Unknown, vec![])] {
            let text = render_label(label, &cited);
            assert_eq!(payload(ModuleKind::FactCheck, &text), strict(ModulePayload::Label { label, cited }));
        }
    }

    #[test]
    fn goal_lines() {
        let text = render_goal_rules(&[vec![3, 9], vec![]]);
        assert_eq!(text, "Goal 1: Premise 3, Premise 9\nGoal 2: none");
        assert_eq!(
            payload(ModuleKind::RuleSelectBackward, &text),
            strict(ModulePayload::GoalRules(GoalRulesAnswer {
                per_goal: vec![(1, vec![3, 9]), (2, vec![])],
                unassigned: Vec::new()
            }))
        );
    }
}
