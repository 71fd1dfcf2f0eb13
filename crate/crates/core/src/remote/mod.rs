//! Module backend driven by a chat-completion endpoint.
//!
//! Each module call renders a prompt from the template files, sends it
//! through a [`Transport`] and parses the answer back into module output.
//! Premise numbers in prompts and answers follow one [`PremiseIndex`]
//! snapshot per call. Configuration comes from the environment:
//! `BICHAIN_ENDPOINT`, `BICHAIN_API_KEY`, `BICHAIN_MODEL` and
//! `BICHAIN_MAX_CONCURRENT`.

mod prompt;
mod response;
mod transport;

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::engine::binding_from_premises;
use crate::logic::{substitute, unify, unify_with, Binding, FactId, KnowledgeBase, Literal, Rule, RuleId};
use crate::modules::symbolic::{self, goal_status, SymbolicBackend};
use crate::modules::{
    CheckOutcome, CheckTarget, ConfusionInput, DeductionStep, Derivation, Exchange, FailureKind, Goal,
    GoalRuleSelection, GoalRules, GoalSet, ModuleBackend, ModuleFailure, ModuleKind, ModuleResult, RelevantFacts,
    RuleSelection,
};
use crate::parser::{render_literal, Hypothesis};

pub use prompt::{
    answer_header, render_prompt, PremiseIndex, PremiseRef, PromptContext, PromptTemplate, TemplateSet,
    TEMPLATE_DIR_ENV,
};
pub use response::{
    answer_body, parse_module_response, render_confusion, render_goal_rules, render_inference, render_inferences,
    render_label, render_premise_lines, render_reason, render_rule_lines, GoalRulesAnswer, InferenceLine,
    ModulePayload, Parsed, ReasonLine, ResponseParseError,
};
pub use transport::{
    completion_text, Cassette, CassetteTransport, HttpTransport, Interaction, RequestGate, Transport, TransportError,
};

pub const ENDPOINT_ENV: &str = "BICHAIN_ENDPOINT";
pub const API_KEY_ENV: &str = "BICHAIN_API_KEY";
pub const MODEL_ENV: &str = "BICHAIN_MODEL";
pub const MAX_CONCURRENT_ENV: &str = "BICHAIN_MAX_CONCURRENT";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{ENDPOINT_ENV} is not set")]
    MissingEndpoint,
    #[error("invalid remote configuration: {0}")]
    Invalid(String),
}

/// Endpoint settings. The credential is never printed.
#[derive(Clone, PartialEq)]
pub struct RemoteConfig {
    /// Full URL of the chat-completion route.
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub retries: usize,
    /// First retry delay; doubles per retry unless the endpoint asks for
    /// a specific wait.
    pub backoff: Duration,
    pub timeout: Duration,
    pub max_concurrent: usize,
}

impl fmt::Debug for RemoteConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteConfig")
            .field("endpoint", &self.endpoint)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("model", &self.model)
            .field("temperature", &self.temperature)
            .field("max_tokens", &self.max_tokens)
            .field("retries", &self.retries)
            .field("backoff", &self.backoff)
            .field("timeout", &self.timeout)
            .field("max_concurrent", &self.max_concurrent)
            .finish()
    }
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            api_key: None,
            model: "gpt-4-0613".to_string(),
            temperature: 0.1,
            max_tokens: 1024,
            retries: 3,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(120),
            max_concurrent: 4,
        }
    }

    pub fn from_env() -> Result<Self, ConfigError> {
        let endpoint = std::env::var(ENDPOINT_ENV).map_err(|_| ConfigError::MissingEndpoint)?;
        let mut cfg = RemoteConfig::new(endpoint);
        cfg.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        if let Ok(model) = std::env::var(MODEL_ENV) {
            cfg.model = model;
        }
        if let Ok(n) = std::env::var(MAX_CONCURRENT_ENV) {
            cfg.max_concurrent = n
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("{MAX_CONCURRENT_ENV} must be a positive integer")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.endpoint.trim().is_empty() {
            return Err(ConfigError::MissingEndpoint);
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ConfigError::Invalid("temperature must lie in [0, 2]".into()));
        }
        if self.max_tokens == 0 {
            return Err(ConfigError::Invalid("max_tokens must be positive".into()));
        }
        if self.max_concurrent == 0 {
            return Err(ConfigError::Invalid("max_concurrent must be positive".into()));
        }
        Ok(())
    }
}

/// Renders the prompt for each module call from the current facts.
#[derive(Debug, Clone, Default)]
struct Prompts {
    templates: TemplateSet,
    hypothesis: String,
    free_text: Vec<String>,
}

fn reason_lines(index: &PremiseIndex, sets: &[GoalSet]) -> Vec<String> {
    sets.iter()
        .map(|s| {
            let goals: Vec<Literal> = s.literals().cloned().collect();
            render_reason(index.rule_number(s.origin_rule), &s.target, &goals)
        })
        .collect()
}

impl Prompts {
    fn base(&self, kb: &KnowledgeBase) -> (PremiseIndex, PromptContext) {
        let index = PremiseIndex::new(kb, &self.free_text);
        let ctx = PromptContext {
            hypothesis: self.hypothesis.clone(),
            premises: index.sentences().to_vec(),
            sections: Vec::new(),
        };
        (index, ctx)
    }

    fn render(&self, kind: ModuleKind, ctx: &PromptContext) -> String {
        render_prompt(self.templates.get(kind), ctx)
    }

    fn fact_identify(&self, kb: &KnowledgeBase) -> (PremiseIndex, String) {
        let (index, ctx) = self.base(kb);
        let prompt = self.render(ModuleKind::FactIdentify, &ctx);
        (index, prompt)
    }

    fn select_forward(
        &self,
        relevant: &RelevantFacts,
        kb: &KnowledgeBase,
        targets: &[Literal],
    ) -> (PremiseIndex, String) {
        let (index, ctx) = self.base(kb);
        let facts = relevant.facts.iter().map(|id| index.cite_fact(*id)).collect();
        let mut ctx = ctx.section("Identified Facts", facts);
        if !targets.is_empty() {
            ctx = ctx.section("Open Goals", targets.iter().map(render_literal).collect());
        }
        let prompt = self.render(ModuleKind::RuleSelectForward, &ctx);
        (index, prompt)
    }

    fn select_backward(&self, goals: &[Literal], kb: &KnowledgeBase) -> (PremiseIndex, String) {
        let (index, ctx) = self.base(kb);
        let lines = goals.iter().enumerate().map(|(i, g)| format!("Goal {}: {}", i + 1, render_literal(g))).collect();
        let prompt = self.render(ModuleKind::RuleSelectBackward, &ctx.section("Goals", lines));
        (index, prompt)
    }

    fn deduce(
        &self,
        relevant: &RelevantFacts,
        selection: &RuleSelection,
        kb: &KnowledgeBase,
    ) -> (PremiseIndex, String) {
        let (index, ctx) = self.base(kb);
        let rules = selection.rules.iter().map(|id| index.cite_rule(*id)).collect();
        let facts = relevant.facts.iter().map(|id| index.cite_fact(*id)).collect();
        let ctx = ctx.section("Selected Rules", rules).section("Identified Facts", facts);
        let prompt = self.render(ModuleKind::LogicDeduce, &ctx);
        (index, prompt)
    }

    fn abduce(&self, selection: &GoalRuleSelection, kb: &KnowledgeBase) -> (PremiseIndex, String) {
        let (index, ctx) = self.base(kb);
        let lines = selection
            .groups
            .iter()
            .flat_map(|g| {
                let goal = render_literal(&g.goal);
                let index = &index;
                g.rules.iter().map(move |r| format!("For \"{goal}\": {}", index.cite_rule(*r)))
            })
            .collect();
        let prompt = self.render(ModuleKind::LogicAbduce, &ctx.section("Selected Rules", lines));
        (index, prompt)
    }

    fn fact_check(&self, target: CheckTarget<'_>, kb: &KnowledgeBase) -> (PremiseIndex, String) {
        let (index, mut ctx) = self.base(kb);
        match target {
            CheckTarget::Hypothesis(h) => ctx.hypothesis = h.render(),
            CheckTarget::GoalSet(set) => {
                let lines = reason_lines(&index, std::slice::from_ref(set));
                ctx = ctx.section("Plausible Reasons", lines);
            }
            CheckTarget::Frontier { hypothesis, goal_sets } => {
                ctx.hypothesis = hypothesis.render();
                if !goal_sets.is_empty() {
                    ctx = ctx.section("Plausible Reasons", reason_lines(&index, goal_sets));
                }
            }
        }
        let prompt = self.render(ModuleKind::FactCheck, &ctx);
        (index, prompt)
    }

    fn confusion(&self, input: ConfusionInput<'_>, kb: &KnowledgeBase) -> (PremiseIndex, String) {
        let (index, ctx) = self.base(kb);
        let ctx = match input {
            ConfusionInput::Deductions(step) => {
                ctx.section("Deduction Results", step.derivations.iter().map(|d| render_literal(&d.literal)).collect())
            }
            ConfusionInput::Abductions(sets) => ctx.section("Abduction Results", reason_lines(&index, sets)),
        };
        let prompt = self.render(ModuleKind::ConfusionCheck, &ctx);
        (index, prompt)
    }
}

fn parse_failure(message: impl Into<String>) -> ModuleFailure {
    ModuleFailure::new(FailureKind::Parse, message)
}

fn resolve(index: &PremiseIndex, n: usize) -> ModuleResult<PremiseRef> {
    index.resolve(n).ok_or_else(|| parse_failure(format!("premise {n} does not exist")))
}

fn facts_of(index: &PremiseIndex, numbers: &[usize]) -> ModuleResult<Vec<FactId>> {
    let mut out = Vec::new();
    for n in numbers {
        if let PremiseRef::Fact(id) = resolve(index, *n)? {
            if !out.contains(&id) {
                out.push(id);
            }
        }
    }
    Ok(out)
}

/// Facts cited, in order and with repetitions.
fn cited_facts(index: &PremiseIndex, numbers: &[usize]) -> ModuleResult<Vec<FactId>> {
    let mut out = Vec::new();
    for n in numbers {
        if let PremiseRef::Fact(id) = resolve(index, *n)? {
            out.push(id);
        }
    }
    Ok(out)
}

fn rules_of(index: &PremiseIndex, numbers: &[usize]) -> ModuleResult<Vec<RuleId>> {
    let mut out = Vec::new();
    for n in numbers {
        if let PremiseRef::Rule(id) = resolve(index, *n)? {
            if !out.contains(&id) {
                out.push(id);
            }
        }
    }
    Ok(out)
}

/// Cited facts arranged to match the rule's conditions in order and yield
/// `conclusion`, preferring distinct facts; otherwise the citation order.
fn arrange_premises(rule: &Rule, cited: &[FactId], conclusion: &Literal, kb: &KnowledgeBase) -> Vec<FactId> {
    struct Search<'a> {
        rule: &'a Rule,
        cited: &'a [FactId],
        conclusion: &'a Literal,
        kb: &'a KnowledgeBase,
        reuse: bool,
    }
    impl Search<'_> {
        fn run(&self, depth: usize, binding: &Binding, used: &mut Vec<FactId>) -> bool {
            let Some(cond) = self.rule.conditions.get(depth) else {
                return substitute(&self.rule.consequent, binding).is_ok_and(|c| &c == self.conclusion);
            };
            for id in self.cited {
                if !self.reuse && used.contains(id) {
                    continue;
                }
                let Some(fact) = self.kb.fact(*id) else { continue };
                if let Some(next) = unify_with(cond, &fact.literal, binding) {
                    used.push(*id);
                    if self.run(depth + 1, &next, used) {
                        return true;
                    }
                    used.pop();
                }
            }
            false
        }
    }
    for reuse in [false, true] {
        let search = Search { rule, cited, conclusion, kb, reuse };
        let mut used = Vec::new();
        if search.run(0, &Binding::empty(), &mut used) {
            return used;
        }
    }
    cited.to_vec()
}

fn derivation_binding(rule: &Rule, premises: &[FactId], conclusion: &Literal, kb: &KnowledgeBase) -> Binding {
    let lits: Option<Vec<&Literal>> = premises.iter().map(|p| kb.fact(*p).map(|f| &f.literal)).collect();
    lits.and_then(|l| binding_from_premises(rule, &l))
        .filter(|b| !b.is_empty())
        .or_else(|| unify(&rule.consequent, conclusion))
        .unwrap_or_else(Binding::empty)
}

/// A [`ModuleBackend`] that asks a language model.
pub struct RemoteBackend {
    transport: Box<dyn Transport>,
    prompts: Prompts,
    last: Option<Exchange>,
    calls: usize,
}

impl RemoteBackend {
    pub fn new(transport: impl Transport + 'static, templates: TemplateSet) -> Self {
        RemoteBackend {
            transport: Box::new(transport),
            prompts: Prompts { templates, ..Prompts::default() },
            last: None,
            calls: 0,
        }
    }

    /// HTTP backend configured from the environment, with templates from
    /// the template directory variable when set.
    pub fn from_env() -> Result<Self, ConfigError> {
        let cfg = RemoteConfig::from_env()?;
        let templates = TemplateSet::from_env().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(RemoteBackend::new(HttpTransport::new(cfg), templates))
    }

    /// Module invocations so far. Transport retries are not counted.
    pub fn calls(&self) -> usize {
        self.calls
    }

    /// Wire attempts so far, retries included.
    pub fn attempts(&self) -> usize {
        self.transport.attempts()
    }

    fn invoke(&mut self, kind: ModuleKind, prompt: String) -> ModuleResult<ModulePayload> {
        self.calls += 1;
        let response = match self.transport.complete(kind, &prompt) {
            Ok(text) => text,
            Err(e) => {
                self.last = Some(Exchange { prompt, response: String::new(), fallback: false });
                return Err(ModuleFailure::new(FailureKind::Transport, e.to_string()));
            }
        };
        let parsed = parse_module_response(kind, &response);
        self.last = Some(Exchange { prompt, response, fallback: parsed.as_ref().is_ok_and(|p| p.fallback) });
        parsed.map(|p| p.value).map_err(|e| parse_failure(e.to_string()))
    }
}

fn mismatch() -> ModuleFailure {
    parse_failure("answer has the wrong shape for this module")
}

impl ModuleBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn handles_free_text(&self) -> bool {
        true
    }

    fn begin(&mut self, hypothesis: &Hypothesis, free_text: &[String]) {
        self.prompts.hypothesis = hypothesis.render();
        self.prompts.free_text = free_text.to_vec();
    }

    fn fact_identify(&mut self, _hypothesis: &Hypothesis, kb: &KnowledgeBase) -> ModuleResult<RelevantFacts> {
        let (index, prompt) = self.prompts.fact_identify(kb);
        let ModulePayload::Premises(numbers) = self.invoke(ModuleKind::FactIdentify, prompt)? else {
            return Err(mismatch());
        };
        Ok(RelevantFacts { facts: facts_of(&index, &numbers)? })
    }

    fn rule_select_forward(
        &mut self,
        relevant: &RelevantFacts,
        kb: &KnowledgeBase,
        targets: &[Literal],
    ) -> ModuleResult<RuleSelection> {
        let (index, prompt) = self.prompts.select_forward(relevant, kb, targets);
        let ModulePayload::Premises(numbers) = self.invoke(ModuleKind::RuleSelectForward, prompt)? else {
            return Err(mismatch());
        };
        let rules = rules_of(&index, &numbers)?;
        let bridge = match rules.as_slice() {
            [only] => kb
                .rule(*only)
                .filter(|r| kb.firings(r, |id| relevant.contains(id)).iter().any(|f| targets.contains(&f.consequent)))
                .map(|r| r.id),
            _ => None,
        };
        Ok(RuleSelection { rules, bridge })
    }

    fn rule_select_backward(&mut self, goals: &[Literal], kb: &KnowledgeBase) -> ModuleResult<GoalRuleSelection> {
        let (index, prompt) = self.prompts.select_backward(goals, kb);
        let ModulePayload::GoalRules(answer) = self.invoke(ModuleKind::RuleSelectBackward, prompt)? else {
            return Err(mismatch());
        };
        let mut groups: Vec<GoalRules> =
            goals.iter().map(|g| GoalRules { goal: g.clone(), rules: Vec::new() }).collect();
        for (i, numbers) in &answer.per_goal {
            let group = i
                .checked_sub(1)
                .and_then(|i| groups.get_mut(i))
                .ok_or_else(|| parse_failure(format!("goal {i} does not exist")))?;
            group.rules = rules_of(&index, numbers)?;
        }
        for id in rules_of(&index, &answer.unassigned)? {
            let Some(rule) = kb.rule(id) else { continue };
            for group in groups.iter_mut() {
                if (goals.len() == 1 || unify(&rule.consequent, &group.goal).is_some()) && !group.rules.contains(&id) {
                    group.rules.push(id);
                }
            }
        }
        Ok(GoalRuleSelection { groups })
    }

    fn logic_deduce(
        &mut self,
        relevant: &RelevantFacts,
        selection: &RuleSelection,
        kb: &KnowledgeBase,
    ) -> ModuleResult<DeductionStep> {
        let (index, prompt) = self.prompts.deduce(relevant, selection, kb);
        let ModulePayload::Inferences { lines, .. } = self.invoke(ModuleKind::LogicDeduce, prompt)? else {
            return Err(mismatch());
        };
        let mut derivations: Vec<Derivation> = Vec::new();
        for line in lines {
            let cited = cited_facts(&index, &line.cited)?;
            let cited_rules = rules_of(&index, &line.cited)?;
            let rule_id = match (cited_rules.last(), selection.rules.as_slice()) {
                (Some(r), _) => *r,
                (None, [only]) => *only,
                (None, _) => continue,
            };
            let Some(rule) = kb.rule(rule_id) else { continue };
            let premises = arrange_premises(rule, &cited, &line.conclusion, kb);
            let binding = derivation_binding(rule, &premises, &line.conclusion, kb);
            if derivations.iter().any(|d| d.literal == line.conclusion) {
                continue;
            }
            derivations.push(Derivation { literal: line.conclusion, rule: rule_id, binding, premises });
        }
        Ok(DeductionStep { derivations })
    }

    fn logic_abduce(&mut self, selection: &GoalRuleSelection, kb: &KnowledgeBase) -> ModuleResult<Vec<GoalSet>> {
        let (index, prompt) = self.prompts.abduce(selection, kb);
        let ModulePayload::Reasons { lines, .. } = self.invoke(ModuleKind::LogicAbduce, prompt)? else {
            return Err(mismatch());
        };
        let mut sets = Vec::new();
        for line in lines {
            let PremiseRef::Rule(rule_id) = resolve(&index, line.rule)? else {
                continue;
            };
            let binding =
                kb.rule(rule_id).and_then(|r| unify(&r.consequent, &line.target)).unwrap_or_else(Binding::empty);
            let goals =
                line.goals.into_iter().map(|literal| Goal { status: goal_status(&literal, kb), literal }).collect();
            sets.push(GoalSet { target: line.target, origin_rule: rule_id, binding, goals });
        }
        Ok(sets)
    }

    fn fact_check(&mut self, target: CheckTarget<'_>, kb: &KnowledgeBase) -> ModuleResult<CheckOutcome> {
        let (index, prompt) = self.prompts.fact_check(target, kb);
        let ModulePayload::Label { label, cited } = self.invoke(ModuleKind::FactCheck, prompt)? else {
            return Err(mismatch());
        };
        Ok(CheckOutcome { label, cited: facts_of(&index, &cited)? })
    }

    fn confusion_check(&mut self, input: ConfusionInput<'_>, kb: &KnowledgeBase) -> ModuleResult<bool> {
        let (_, prompt) = self.prompts.confusion(input, kb);
        match self.invoke(ModuleKind::ConfusionCheck, prompt)? {
            ModulePayload::Confusion(c) => Ok(c),
            _ => Err(mismatch()),
        }
    }

    fn take_exchange(&mut self) -> Option<Exchange> {
        self.last.take()
    }
}

/// Runs the symbolic modules and records, for every call, the prompt the
/// remote backend would send and an answer in the module's grammar. The
/// result replays through [`CassetteTransport`].
#[derive(Debug, Default)]
pub struct CassetteRecorder {
    prompts: Prompts,
    pub cassette: Cassette,
}

impl CassetteRecorder {
    pub fn new(templates: TemplateSet) -> Self {
        CassetteRecorder { prompts: Prompts { templates, ..Prompts::default() }, cassette: Cassette::default() }
    }

    fn record(&mut self, module: ModuleKind, prompt: String, response: String) {
        self.cassette.interactions.push(Interaction { module, prompt, response });
    }
}

impl ModuleBackend for CassetteRecorder {
    fn name(&self) -> &str {
        "recorder"
    }

    fn begin(&mut self, hypothesis: &Hypothesis, free_text: &[String]) {
        self.prompts.hypothesis = hypothesis.render();
        self.prompts.free_text = free_text.to_vec();
    }

    fn fact_identify(&mut self, hypothesis: &Hypothesis, kb: &KnowledgeBase) -> ModuleResult<RelevantFacts> {
        let (index, prompt) = self.prompts.fact_identify(kb);
        let result = symbolic::fact_identify(hypothesis, kb);
        let items: Vec<(usize, String)> = result
            .as_ref()
            .map(|r| r.facts.clone())
            .unwrap_or_default()
            .into_iter()
            .map(|id| {
                let n = index.fact_number(id);
                (n, index.sentences()[n - 1].clone())
            })
            .collect();
        self.record(ModuleKind::FactIdentify, prompt, render_premise_lines(&items));
        result
    }

    fn rule_select_forward(
        &mut self,
        relevant: &RelevantFacts,
        kb: &KnowledgeBase,
        targets: &[Literal],
    ) -> ModuleResult<RuleSelection> {
        let (index, prompt) = self.prompts.select_forward(relevant, kb, targets);
        let selection = symbolic::rule_select_forward(relevant, kb, targets);
        let items: Vec<(usize, String)> = selection
            .rules
            .iter()
            .map(|id| {
                let n = index.rule_number(*id);
                (n, index.sentences()[n - 1].clone())
            })
            .collect();
        self.record(ModuleKind::RuleSelectForward, prompt, render_rule_lines(&items));
        Ok(selection)
    }

    fn rule_select_backward(&mut self, goals: &[Literal], kb: &KnowledgeBase) -> ModuleResult<GoalRuleSelection> {
        let (index, prompt) = self.prompts.select_backward(goals, kb);
        let selection = symbolic::rule_select_backward(goals, kb)?;
        let numbers: Vec<Vec<usize>> =
            selection.groups.iter().map(|g| g.rules.iter().map(|r| index.rule_number(*r)).collect()).collect();
        self.record(ModuleKind::RuleSelectBackward, prompt, render_goal_rules(&numbers));
        Ok(selection)
    }

    fn logic_deduce(
        &mut self,
        relevant: &RelevantFacts,
        selection: &RuleSelection,
        kb: &KnowledgeBase,
    ) -> ModuleResult<DeductionStep> {
        let (index, prompt) = self.prompts.deduce(relevant, selection, kb);
        let step = symbolic::logic_deduce(selection, kb);
        let lines: Vec<String> = step
            .derivations
            .iter()
            .map(|d| {
                let mut cited: Vec<usize> = d.premises.iter().map(|p| index.fact_number(*p)).collect();
                cited.push(index.rule_number(d.rule));
                render_inference(&cited, &d.literal)
            })
            .collect();
        self.record(ModuleKind::LogicDeduce, prompt, render_inferences(&lines));
        Ok(step)
    }

    fn logic_abduce(&mut self, selection: &GoalRuleSelection, kb: &KnowledgeBase) -> ModuleResult<Vec<GoalSet>> {
        let (index, prompt) = self.prompts.abduce(selection, kb);
        let sets = symbolic::logic_abduce(selection, kb)?;
        self.record(ModuleKind::LogicAbduce, prompt, reason_lines(&index, &sets).join("\n"));
        Ok(sets)
    }

    fn fact_check(&mut self, target: CheckTarget<'_>, kb: &KnowledgeBase) -> ModuleResult<CheckOutcome> {
        let (index, prompt) = self.prompts.fact_check(target, kb);
        let outcome = SymbolicBackend.fact_check(target, kb)?;
        let cited: Vec<usize> = outcome.cited.iter().map(|id| index.fact_number(*id)).collect();
        self.record(ModuleKind::FactCheck, prompt, render_label(outcome.label, &cited));
        Ok(outcome)
    }

    fn confusion_check(&mut self, input: ConfusionInput<'_>, kb: &KnowledgeBase) -> ModuleResult<bool> {
        let (_, prompt) = self.prompts.confusion(input, kb);
        let confused = symbolic::confusion_check(input);
        self.record(ModuleKind::ConfusionCheck, prompt, render_confusion(confused));
        Ok(confused)
    }
}
