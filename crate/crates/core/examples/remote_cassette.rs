//! Drives the remote backend offline. The symbolic modules answer every
//! prompt once while a recorder keeps the (prompt, answer) pairs; the
//! remote backend then replays the same run from that cassette, parsing
//! each answer as it would a model's.
//!
//! With BICHAIN_ENDPOINT (and optionally BICHAIN_API_KEY, BICHAIN_MODEL)
//! set, the last part sends the same problem to a live endpoint.

use bichain::engine::{prove, EngineConfig, EngineKind};
use bichain::parser::{parse_problem, ParseOptions};
use bichain::remote::{CassetteRecorder, RemoteBackend, TemplateSet, ENDPOINT_ENV};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = parse_problem(include_str!("../fixtures/cow_chases_bear.pw"), ParseOptions::default())?;
    let config = EngineConfig::default();

    let mut recorder = CassetteRecorder::new(TemplateSet::default());
    let recorded = prove(EngineKind::BiChainer, &problem, &config, &mut recorder)?;
    println!("recorded {} interactions", recorder.cassette.interactions.len());

    let mut remote = RemoteBackend::new(recorder.cassette.responder(), TemplateSet::default());
    let replayed = prove(EngineKind::BiChainer, &problem, &config, &mut remote)?;
    println!(
        "symbolic: {} in {} calls; remote replay: {} in {} calls, {} warnings",
        recorded.label,
        recorded.calls,
        replayed.label,
        replayed.calls,
        replayed.warnings.len()
    );

    let first = replayed.trace.steps.iter().find_map(|s| s.exchange.as_ref()).ok_or("no exchange recorded")?;
    let tail: Vec<&str> = first.prompt.lines().rev().take(12).collect();
    println!("\nend of the first prompt:");
    for line in tail.iter().rev() {
        println!("  | {line}");
    }
    println!("answer:\n  | {}", first.response.replace('\n', "\n  | "));

    if std::env::var(ENDPOINT_ENV).is_ok() {
        let mut live = RemoteBackend::from_env()?;
        let verdict = prove(EngineKind::BiChainer, &problem, &config, &mut live)?;
        println!("\nlive endpoint: {} in {} calls ({} wire attempts)", verdict.label, verdict.calls, live.attempts());
        for w in &verdict.warnings {
            println!("  warning: {w}");
        }
    } else {
        println!("\n{ENDPOINT_ENV} not set; skipping the live run");
    }
    Ok(())
}
