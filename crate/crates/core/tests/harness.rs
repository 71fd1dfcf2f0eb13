mod common;

use bichain::engine::EngineKind;
use bichain::harness::{
    confusion_matrix, gold_label, load_problems, run_bench, run_bench_with, GoldSource, MetricsReport, RunConfig,
};
use bichain::logic::{KnowledgeBase, Literal};
use bichain::modules::{
    CheckOutcome, CheckTarget, ConfusionInput, DeductionStep, GoalRuleSelection, GoalSet, ModuleBackend, ModuleResult,
    RelevantFacts, RuleSelection, SymbolicBackend,
};
use bichain::oracle::generate_corpus;
use bichain::parser::{Hypothesis, Label, Problem};

/// Symbolic answers, except that evaluating a hypothesis about the mouse
/// panics.
struct Poisoned(SymbolicBackend);

impl ModuleBackend for Poisoned {
    fn name(&self) -> &str {
        "poisoned"
    }

    fn begin(&mut self, hypothesis: &Hypothesis, _: &[String]) {
        if hypothesis.render().contains("mouse") {
            panic!("poisoned hypothesis");
        }
    }

    fn fact_identify(&mut self, h: &Hypothesis, kb: &KnowledgeBase) -> ModuleResult<RelevantFacts> {
        self.0.fact_identify(h, kb)
    }

    fn rule_select_forward(
        &mut self,
        r: &RelevantFacts,
        kb: &KnowledgeBase,
        t: &[Literal],
    ) -> ModuleResult<RuleSelection> {
        self.0.rule_select_forward(r, kb, t)
    }

    fn rule_select_backward(&mut self, goals: &[Literal], kb: &KnowledgeBase) -> ModuleResult<GoalRuleSelection> {
        self.0.rule_select_backward(goals, kb)
    }

    fn logic_deduce(
        &mut self,
        r: &RelevantFacts,
        s: &RuleSelection,
        kb: &KnowledgeBase,
    ) -> ModuleResult<DeductionStep> {
        self.0.logic_deduce(r, s, kb)
    }

    fn logic_abduce(&mut self, s: &GoalRuleSelection, kb: &KnowledgeBase) -> ModuleResult<Vec<GoalSet>> {
        self.0.logic_abduce(s, kb)
    }

    fn fact_check(&mut self, t: CheckTarget<'_>, kb: &KnowledgeBase) -> ModuleResult<CheckOutcome> {
        self.0.fact_check(t, kb)
    }

    fn confusion_check(&mut self, i: ConfusionInput<'_>, kb: &KnowledgeBase) -> ModuleResult<bool> {
        self.0.confusion_check(i, kb)
    }
}

fn fixtures() -> Vec<Problem> {
    common::FIXTURES.iter().map(|n| common::fixture(n)).collect()
}

fn symbolic() -> Box<dyn ModuleBackend> {
    Box::new(SymbolicBackend)
}

fn config(engines: Vec<EngineKind>) -> RunConfig {
    let mut cfg = RunConfig::new("in-memory", engines);
    cfg.parallelism = 4;
    cfg
}

#[test]
fn fixtures_are_all_correct_and_valid() {
    let report = run_bench_with(&fixtures(), &config(EngineKind::ALL.to_vec()), &symbolic).unwrap();
    for e in &report.engines {
        assert_eq!(e.evaluated, 4);
        assert_eq!(e.failed, 0);
        assert_eq!(e.accuracy, Some(1.0), "{}", e.engine);
        assert_eq!(e.proof_validity, Some(1.0));
        assert_eq!(e.proof_accuracy, Some(1.0));
        // Three decided fixtures are scored; the Unknown one is not.
        assert_eq!(e.premise_scored, 3);
    }
    let bi = report.engine(EngineKind::BiChainer).unwrap();
    assert_eq!(bi.confusion.get(Label::Proved, Label::Proved), 2);
    assert_eq!(bi.confusion.get(Label::Disproved, Label::Disproved), 1);
    assert_eq!(bi.confusion.get(Label::Unknown, Label::Unknown), 1);
}

#[test]
fn a_panicking_evaluation_is_isolated() {
    // bear_not_big asks about the bear; the mouse hypothesis is added.
    let mut problems = fixtures();
    problems
        .push(common::problem("id: poisoned\nfact: The mouse is big.\nhypothesis: The mouse is big.\nlabel: Proved\n"));
    let poisoned = || Box::new(Poisoned(SymbolicBackend)) as Box<dyn ModuleBackend>;
    let report = run_bench_with(&problems, &config(vec![EngineKind::BiChainer]), &poisoned).unwrap();
    let bi = report.engine(EngineKind::BiChainer).unwrap();
    assert_eq!(bi.evaluated, 5);
    assert_eq!(bi.failed, 1);
    assert_eq!(bi.accuracy, Some(1.0));
    assert_eq!(bi.confusion.total(), 4);
    assert_eq!(bi.confusion.skipped, 1);
    let bad = report.results.iter().find(|r| r.id == "poisoned").unwrap();
    assert!(bad.error.as_deref().unwrap().contains("poisoned hypothesis"));
    assert_eq!(bad.predicted, None);
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let problems = generate_corpus(30, &[1, 3, 5], 7).unwrap();
    let mut a = config(EngineKind::ALL.to_vec());
    a.parallelism = 1;
    let mut b = a.clone();
    b.parallelism = 8;
    let zeroed = |mut r: MetricsReport| {
        r.generated_at = 0;
        r.to_json()
    };
    let first = zeroed(run_bench_with(&problems, &a, &symbolic).unwrap());
    let second = zeroed(run_bench_with(&problems, &b, &symbolic).unwrap());
    assert_eq!(first, second);
}

#[test]
fn confusion_matrix_invariants() {
    let pairs: Vec<(Option<Label>, Option<Label>)> = Label::ALL
        .iter()
        .flat_map(|g| Label::ALL.iter().map(move |p| (Some(*g), Some(*p))))
        .chain([(None, Some(Label::Proved)), (Some(Label::Unknown), None)])
        .collect();
    let m = confusion_matrix(pairs);
    assert_eq!(m.total(), 9);
    assert_eq!(m.skipped, 2);
    assert_eq!(m.correct(), 3);
    for l in Label::ALL {
        assert_eq!(m.row_sum(l), 3);
    }
    assert_eq!(m.accuracy(), Some(3.0 / 9.0));
    assert_eq!(confusion_matrix(Vec::new()).accuracy(), None);
}

#[test]
fn gold_labels_prefer_the_file() {
    let p = common::fixture("squirrel_blue");
    assert_eq!(gold_label(&p), (Some(Label::Proved), GoldSource::File));
    let unlabeled = common::problem("fact: The cow is big.\nhypothesis: The cow is not big.\n");
    assert_eq!(gold_label(&unlabeled), (Some(Label::Disproved), GoldSource::Oracle));
    let free = bichain::parser::parse_problem(
        "premise: If a show is popular, Karen will binge-watch it.\nhypothesis: The cow is big.\n",
        bichain::parser::ParseOptions { allow_free_text: true },
    )
    .unwrap();
    assert_eq!(gold_label(&free), (None, GoldSource::Absent));
}

#[test]
fn run_bench_writes_report_tables_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let lines: Vec<String> =
        generate_corpus(9, &[2], 3).unwrap().iter().map(|p| serde_json::to_string(&p.to_record()).unwrap()).collect();
    std::fs::write(&corpus, lines.join("\n") + "\nnot json\n").unwrap();

    let (problems, errors) = load_problems(std::slice::from_ref(&corpus)).unwrap();
    assert_eq!(problems.len(), 9);
    assert_eq!(errors.len(), 1);

    let mut cfg = RunConfig::new(&corpus, vec![EngineKind::BiChainer, EngineKind::Backward]);
    cfg.report = Some(dir.path().join("out/report.json"));
    cfg.traces = Some(dir.path().join("out/traces"));
    let report = run_bench(&cfg).unwrap();
    assert_eq!(report.corpus.size, 9);
    assert_eq!(report.corpus.load_errors.len(), 1);
    assert_eq!(report.results.len(), 18);

    let out = dir.path().join("out");
    for name in ["report.json", "report.engines.csv", "report.confusion.csv", "report.calls.csv", "report.problems.csv"]
    {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let text = std::fs::read_to_string(out.join("report.json")).unwrap();
    let back: MetricsReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.results, report.results);
    for engine in ["bichainer", "backward"] {
        let n = std::fs::read_dir(out.join("traces").join(engine)).unwrap().count();
        assert_eq!(n, 9, "{engine}");
    }
}

#[test]
fn missing_corpus_and_empty_engine_list_are_errors() {
    let cfg = RunConfig::new("/nonexistent/corpus.jsonl", vec![EngineKind::BiChainer]);
    assert!(run_bench(&cfg).is_err());
    let cfg = RunConfig::new("/nonexistent/corpus.jsonl", Vec::new());
    assert!(cfg.validate().is_err());
}
