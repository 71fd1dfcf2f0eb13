//! Runs the three engines on a bundled fixture and prints the Bi-Chainer
//! trace step by step, including the direction switches.
//!
//! cargo run --example prove_fixture [-- path/to/problem.pw]

use bichain::engine::{prove, Action, EngineConfig, EngineKind, StepOutput};
use bichain::modules::SymbolicBackend;
use bichain::parser::{parse_problem, ParseOptions};

const DEFAULT: &str = include_str!("../fixtures/squirrel_blue.pw");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT.to_string(),
    };
    let problem = parse_problem(&text, ParseOptions::default())?;
    let hypothesis = problem.hypothesis().ok_or("expected a single hypothesis")?;
    println!("hypothesis: {}", hypothesis.render());
    let config = EngineConfig::default();

    for kind in EngineKind::ALL {
        let verdict = prove(kind, &problem, &config, &mut SymbolicBackend)?;
        println!("{kind:<10} {:<10} {:>3} calls", verdict.label, verdict.calls);
    }

    let verdict = prove(EngineKind::BiChainer, &problem, &config, &mut SymbolicBackend)?;
    println!("\nbichainer trace:");
    for step in &verdict.trace.steps {
        let detail = match &step.output {
            StepOutput::Switch { reason, to } => format!("-> {to} ({reason:?})"),
            StepOutput::Check { label, .. } => label.to_string(),
            StepOutput::Confusion { confused } => format!("confused: {confused}"),
            _ => step.rendered.join("; "),
        };
        let marker = if step.action == Action::Switch { "*" } else { " " };
        println!("{marker}{:>3} {:<8} {:<20} {detail}", step.index, step.direction, step.action);
    }
    Ok(())
}
