mod common;

use std::time::Duration;

use bichain::engine::{bichainer_prove, prove, replay_validate, EngineConfig, EngineKind, StepOutput};
use bichain::modules::{FailureKind, ModuleKind};
use bichain::oracle::{generate_corpus, premise_set};
use bichain::remote::{CassetteRecorder, HttpTransport, RemoteBackend, RemoteConfig, TemplateSet};

use common::stub::StubServer;
use common::{fixture, Corrupting};

fn record(kind: EngineKind, problem: &bichain::parser::Problem) -> (bichain::engine::Verdict, CassetteRecorder) {
    let mut rec = CassetteRecorder::new(TemplateSet::default());
    let v = prove(kind, problem, &EngineConfig::default(), &mut rec).unwrap();
    (v, rec)
}

fn http(url: &str) -> RemoteConfig {
    let mut cfg = RemoteConfig::new(url);
    cfg.backoff = Duration::from_millis(1);
    cfg.timeout = Duration::from_secs(10);
    cfg
}

#[test]
fn replayed_answers_reproduce_the_symbolic_run() {
    let problems = generate_corpus(45, &[0, 2, 4, 5], 11).unwrap();
    for (i, p) in problems.iter().enumerate() {
        for kind in EngineKind::ALL {
            let (symbolic, rec) = record(kind, p);
            let mut remote = RemoteBackend::new(rec.cassette.responder(), TemplateSet::default());
            let v = prove(kind, p, &EngineConfig::default(), &mut remote).unwrap();
            assert_eq!(v.label, symbolic.label, "#{i} {kind}");
            assert_eq!(v.calls, symbolic.calls, "#{i} {kind}");
            assert_eq!(remote.calls(), v.calls);
            assert!(v.warnings.is_empty(), "#{i} {kind}: {:?}", v.warnings);
            assert_eq!(premise_set(&v.trace), premise_set(&symbolic.trace), "#{i} {kind}");
            replay_validate(&v.trace, p).unwrap_or_else(|e| panic!("#{i} {kind}: {e}"));
        }
    }
}

#[test]
fn a_hallucinated_conclusion_fails_replay() {
    let p = fixture("cow_chases_bear");
    let (_, mut rec) = record(EngineKind::Forward, &p);
    let deduce = rec
        .cassette
        .interactions
        .iter_mut()
        .find(|i| i.module == ModuleKind::LogicDeduce && i.response.contains("the bear chases the tiger"))
        .expect("recorded deduction");
    deduce.response = deduce.response.replace("the bear chases the tiger", "the bear chases the cow");
    let mut remote = RemoteBackend::new(rec.cassette.responder(), TemplateSet::default());
    let v = prove(EngineKind::Forward, &p, &EngineConfig::default(), &mut remote).unwrap();
    assert!(v
        .trace
        .derivations()
        .any(|(_, d)| bichain::parser::render_literal(&d.literal) == "The bear chases the cow."));
    assert!(replay_validate(&v.trace, &p).is_err());
}

#[test]
fn a_garbled_answer_stalls_instead_of_failing() {
    let targets = [
        ModuleKind::RuleSelectForward,
        ModuleKind::RuleSelectBackward,
        ModuleKind::LogicDeduce,
        ModuleKind::LogicAbduce,
        ModuleKind::FactCheck,
        ModuleKind::ConfusionCheck,
    ];
    let mut covered = Vec::new();
    for name in ["squirrel_blue", "cow_chases_bear"] {
        let p = fixture(name);
        for target in targets {
            let mut rec = Corrupting::new(target, 0);
            let recorded = bichainer_prove(&p, &EngineConfig::default(), &mut rec).unwrap();
            if !rec.fired() {
                continue;
            }
            covered.push(target);
            let mut remote = RemoteBackend::new(rec.inner.cassette.responder(), TemplateSet::default());
            let v = bichainer_prove(&p, &EngineConfig::default(), &mut remote).unwrap();
            assert_eq!(v.label, recorded.label, "{name} {target}");
            assert_eq!(v.calls, recorded.calls, "{name} {target}");
            let failures: Vec<FailureKind> = v
                .trace
                .steps
                .iter()
                .filter_map(|s| match &s.output {
                    StepOutput::Failure { failure } => Some(failure.kind),
                    _ => None,
                })
                .collect();
            assert_eq!(failures, [FailureKind::Parse], "{name} {target}");
            assert!(v.warnings.iter().any(|w| w.contains(&target.to_string())), "{target}: {:?}", v.warnings);
            replay_validate(&v.trace, &p).unwrap();
        }
    }
    for target in targets {
        assert!(covered.contains(&target), "{target} never corrupted");
    }
}

#[test]
fn an_unreachable_endpoint_aborts_with_unknown() {
    let p = fixture("squirrel_blue");
    let (_, rec) = record(EngineKind::BiChainer, &p);
    let stub = StubServer::start(&rec.cassette, 1000);
    let mut cfg = http(&stub.url);
    cfg.retries = 2;
    let mut remote = RemoteBackend::new(HttpTransport::new(cfg), TemplateSet::default());
    let v = bichainer_prove(&p, &EngineConfig::default(), &mut remote).unwrap();
    assert_eq!(v.label, bichain::parser::Label::Unknown);
    assert_eq!(v.calls, 1);
    assert_eq!(remote.attempts(), 3);
    assert_eq!(stub.requests(), 3);
    assert!(matches!(
        &v.trace.steps[0].output,
        StepOutput::Failure { failure } if failure.kind == FailureKind::Transport
    ));
}

#[test]
fn the_api_key_is_sent_as_a_bearer_token() {
    let p = fixture("bear_not_big");
    let (recorded, rec) = record(EngineKind::BiChainer, &p);
    let stub = StubServer::start(&rec.cassette, 0);
    let mut cfg = http(&stub.url);
    cfg.api_key = Some("test-token".into());
    assert!(!format!("{cfg:?}").contains("test-token"));
    let mut remote = RemoteBackend::new(HttpTransport::new(cfg), TemplateSet::default());
    let v = bichainer_prove(&p, &EngineConfig::default(), &mut remote).unwrap();
    assert_eq!(v.label, recorded.label);
    let auth = stub.authorization_headers();
    assert_eq!(auth.len(), v.calls);
    assert!(auth.iter().all(|a| a.as_deref() == Some("Bearer test-token")));
}

#[test]
fn prompts_number_facts_before_rules() {
    let p = fixture("bear_not_big");
    let (_, rec) = record(EngineKind::BiChainer, &p);
    let prompt = &rec.cassette.interactions[0].prompt;
    let first_fact = prompt.find("1: The bear sees the mouse.").expect("fact 1");
    let first_rule = prompt.find("8: If the mouse is rough").expect("rule 1 numbered after the seven facts");
    assert!(first_fact < first_rule);
}
