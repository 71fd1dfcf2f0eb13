use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use crate::logic::{FactId, KnowledgeBase, RuleId};
use crate::modules::ModuleKind;
use crate::parser::{render_literal, render_rule};

/// Environment variable naming a directory of replacement template files.
pub const TEMPLATE_DIR_ENV: &str = "BICHAIN_TEMPLATE_DIR";

const HYPOTHESIS_SLOT: &str = "{{hypothesis}}";
const PREMISES_SLOT: &str = "{{premises}}";
const CONTEXT_SLOT: &str = "{{context}}";

/// Instruction text, exemplar and slots for one module. The file name is
/// the module name plus `.txt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub kind: ModuleKind,
    pub text: String,
}

impl PromptTemplate {
    pub fn builtin(kind: ModuleKind) -> Self {
        let text = match kind {
            ModuleKind::FactIdentify => include_str!("../../templates/fact_identify.txt"),
            ModuleKind::RuleSelectForward => include_str!("../../templates/rule_select_forward.txt"),
            ModuleKind::RuleSelectBackward => include_str!("../../templates/rule_select_backward.txt"),
            ModuleKind::LogicDeduce => include_str!("../../templates/logic_deduce.txt"),
            ModuleKind::LogicAbduce => include_str!("../../templates/logic_abduce.txt"),
            ModuleKind::FactCheck => include_str!("../../templates/fact_check.txt"),
            ModuleKind::ConfusionCheck => include_str!("../../templates/confusion_check.txt"),
        };
        PromptTemplate { kind, text: text.to_string() }
    }

    pub fn file_name(kind: ModuleKind) -> String {
        format!("{kind}.txt")
    }
}

/// The header that opens a module's answer section.
pub fn answer_header(kind: ModuleKind) -> &'static str {
    match kind {
        ModuleKind::FactIdentify => "Fact Identify:",
        ModuleKind::RuleSelectForward | ModuleKind::RuleSelectBackward => "Rule Selection:",
        ModuleKind::LogicDeduce => "Inferences:",
        ModuleKind::LogicAbduce => "Plausible Reasons:",
        ModuleKind::FactCheck => "Fact Check:",
        ModuleKind::ConfusionCheck => "Confusion Check:",
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<ModuleKind, PromptTemplate>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet { templates: ModuleKind::ALL.iter().map(|k| (*k, PromptTemplate::builtin(*k))).collect() }
    }
}

impl TemplateSet {
    /// Built-in templates, with any `<module>.txt` found in `dir` taking
    /// precedence.
    pub fn load(dir: Option<&Path>) -> io::Result<Self> {
        let mut set = TemplateSet::default();
        if let Some(dir) = dir {
            for kind in ModuleKind::ALL {
                let path = dir.join(PromptTemplate::file_name(kind));
                if path.is_file() {
                    let text = std::fs::read_to_string(&path)?;
                    set.templates.insert(kind, PromptTemplate { kind, text });
                }
            }
        }
        Ok(set)
    }

    /// Honors the template directory variable when set.
    pub fn from_env() -> io::Result<Self> {
        match std::env::var_os(TEMPLATE_DIR_ENV) {
            Some(dir) => TemplateSet::load(Some(Path::new(&dir))),
            None => Ok(TemplateSet::default()),
        }
    }

    pub fn get(&self, kind: ModuleKind) -> &PromptTemplate {
        &self.templates[&kind]
    }
}

/// What a prompt is filled with: the hypothesis sentence, the numbered
/// premises and extra titled sections placed before the answer header.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PromptContext {
    pub hypothesis: String,
    pub premises: Vec<String>,
    pub sections: Vec<(String, Vec<String>)>,
}

impl PromptContext {
    pub fn section(mut self, title: &str, lines: Vec<String>) -> Self {
        self.sections.push((title.to_string(), lines));
        self
    }
}

/// Fills the template slots. Premises are numbered from 1.
pub fn render_prompt(template: &PromptTemplate, ctx: &PromptContext) -> String {
    let premises =
        ctx.premises.iter().enumerate().map(|(i, p)| format!("{}: {p}", i + 1)).collect::<Vec<_>>().join("\n");
    let mut context = String::new();
    for (title, lines) in &ctx.sections {
        context.push_str(title);
        context.push_str(":\n");
        for line in lines {
            context.push_str(line);
            context.push('\n');
        }
        context.push('\n');
    }
    template
        .text
        .replace(HYPOTHESIS_SLOT, &ctx.hypothesis)
        .replace(PREMISES_SLOT, &premises)
        .replace(CONTEXT_SLOT, &context)
}

/// What a premise number in a prompt refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PremiseRef {
    Fact(FactId),
    Rule(RuleId),
    FreeText(usize),
}

/// Premise numbering for one knowledge-base snapshot: facts in order, then
/// rules, then free-text premises.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PremiseIndex {
    entries: Vec<PremiseRef>,
    sentences: Vec<String>,
}

impl PremiseIndex {
    pub fn new(kb: &KnowledgeBase, free_text: &[String]) -> Self {
        let mut entries = Vec::new();
        let mut sentences = Vec::new();
        for f in kb.facts() {
            entries.push(PremiseRef::Fact(f.id));
            sentences.push(render_literal(&f.literal));
        }
        for r in kb.rules() {
            entries.push(PremiseRef::Rule(r.id));
            sentences.push(render_rule(r));
        }
        for (i, t) in free_text.iter().enumerate() {
            entries.push(PremiseRef::FreeText(i));
            sentences.push(t.clone());
        }
        PremiseIndex { entries, sentences }
    }

    pub fn sentences(&self) -> &[String] {
        &self.sentences
    }

    pub fn resolve(&self, number: usize) -> Option<PremiseRef> {
        number.checked_sub(1).and_then(|i| self.entries.get(i)).copied()
    }

    fn number(&self, target: PremiseRef) -> usize {
        self.entries.iter().position(|e| *e == target).map_or(0, |i| i + 1)
    }

    pub fn fact_number(&self, id: FactId) -> usize {
        self.number(PremiseRef::Fact(id))
    }

    pub fn rule_number(&self, id: RuleId) -> usize {
        self.number(PremiseRef::Rule(id))
    }

    /// `Premise k: sentence` for a fact.
    pub fn cite_fact(&self, id: FactId) -> String {
        let n = self.fact_number(id);
        format!("Premise {n}: {}", self.sentences.get(n.wrapping_sub(1)).map_or("", String::as_str))
    }

    pub fn cite_rule(&self, id: RuleId) -> String {
        let n = self.rule_number(id);
        format!("Premise {n}: {}", self.sentences.get(n.wrapping_sub(1)).map_or("", String::as_str))
    }
}
