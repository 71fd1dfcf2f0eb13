//! Replays a trace against its problem, then shows replay rejecting a
//! trace whose derivation claims a conclusion its rule does not give.

use bichain::engine::{prove, replay_validate, EngineConfig, EngineKind, StepOutput};
use bichain::modules::SymbolicBackend;
use bichain::parser::{parse_clause, parse_problem, ParseOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = parse_problem(include_str!("../fixtures/squirrel_blue.pw"), ParseOptions::default())?;
    let verdict = prove(EngineKind::BiChainer, &problem, &EngineConfig::default(), &mut SymbolicBackend)?;
    println!("{} in {} calls", verdict.label, verdict.calls);
    println!("replay: {:?}", replay_validate(&verdict.trace, &problem));

    // Round trip through JSON, as a trace file would.
    let mut tampered = bichain::engine::ProofTrace::from_json(&verdict.trace.to_json())?;
    let forged = parse_clause("The squirrel is red", false)?;
    let step = tampered
        .steps
        .iter_mut()
        .find(|s| matches!(&s.output, StepOutput::Derivations { derivations } if !derivations.is_empty()))
        .ok_or("no derivation to tamper with")?;
    if let StepOutput::Derivations { derivations } = &mut step.output {
        println!("rewriting step {}: {:?} -> red", step.index, step.rendered);
        derivations[0].literal = forged;
    }
    match replay_validate(&tampered, &problem) {
        Ok(()) => println!("tampered trace unexpectedly replayed"),
        Err(e) => println!("tampered trace rejected: {e}"),
    }
    Ok(())
}
